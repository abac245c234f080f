use std::fmt::Write as _;
use std::path::Path;

use chaplygin::brackets::{BracketTable, BracketVariant, ReducedBracket, COORDINATE_LABELS};
use chaplygin::dynamics::{
    full_rhs, integrate, integrate_rescaled, multiplier_rhs, reduced_rhs, Constraints, FullState,
    IntegrateOptions, MultiplierState,
};
use chaplygin::so3::{exp_rotation, rotation_with_poisson_vector};
use chaplygin::verify::{run_suites, Suite, VerificationReport};
use chaplygin::{Mat3, ReducedState};

use crate::config::{Model, RunConfig};
use crate::table::Table;
use crate::CliError;

fn initial_attitude(cfg: &RunConfig) -> Mat3 {
    match cfg.attitude {
        Some(v) => exp_rotation(&v),
        None => rotation_with_poisson_vector(&cfg.initial.gamma),
    }
}

/// Integrates the configured model and returns its trajectory table.
pub fn simulate(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let opts = IntegrateOptions {
        renormalize_every: cfg.renormalize_every,
        sample_stride: cfg.stride,
        substeps: 1,
        label: format!("{:?}", cfg.model).to_lowercase(),
    };
    let [x, y] = cfg.position;
    let table = match cfg.model {
        Model::Reduced => {
            let rhs = |s: &ReducedState| Ok(reduced_rhs(p, s));
            Table::from_reduced(&integrate(p, rhs, cfg.initial, cfg.dt, cfg.steps, &opts)?)
        }
        Model::Rescaled => Table::from_reduced(&integrate_rescaled(
            p,
            cfg.initial,
            cfg.dt,
            cfg.steps,
            &opts,
        )?),
        Model::Full => {
            let s = FullState {
                g: initial_attitude(cfg),
                x,
                y,
                k: cfg.initial.k,
            };
            let rhs = |s: &FullState| Ok(full_rhs(p, s));
            Table::from_full(&integrate(p, rhs, s, cfg.dt, cfg.steps, &opts)?)
        }
        Model::Multiplier => {
            let s = MultiplierState::consistent(p, initial_attitude(cfg), x, y, cfg.initial.k);
            let rhs = |s: &MultiplierState| Ok(multiplier_rhs(p, s, Constraints::Rolling)?.rates);
            Table::from_multiplier(p, &integrate(p, rhs, s, cfg.dt, cfg.steps, &opts)?)
        }
    };
    Ok(table)
}

/// Suites selected by name; `all` selects every suite.
pub fn select_suites(which: &str) -> Result<Vec<Suite>, CliError> {
    if which == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    Suite::from_name(which).map(|s| vec![s]).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(Suite::name).collect();
        CliError::Config(format!(
            "unknown check '{which}' (expected all, {})",
            names.join(", ")
        ))
    })
}

pub fn verify(cfg: &RunConfig, which: &str) -> Result<VerificationReport, CliError> {
    let suites = select_suites(which)?;
    Ok(run_suites(&cfg.params, &cfg.verify, &suites, &cfg.variants))
}

fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// The three coefficient tables at the configured state, with labelled rows
/// and columns.
pub fn bracket_tables(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let s = &cfg.initial;
    writeln!(
        out,
        "state K = ({}, {}, {}), gamma = ({}, {}, {}), mu = {}",
        s.k.x,
        s.k.y,
        s.k.z,
        s.gamma.x,
        s.gamma.y,
        s.gamma.z,
        cfg.params.mu(&s.gamma)
    )
    .expect("writing to a String");
    for variant in BracketVariant::ALL {
        let m = ReducedBracket::new(cfg.params, variant).coefficients(s);
        out.push('\n');
        out.push_str(variant.name());
        out.push('\n');
        out.push_str("    ");
        for label in COORDINATE_LABELS {
            let _ = write!(out, "{label:>16}");
        }
        out.push('\n');
        for (i, label) in COORDINATE_LABELS.iter().enumerate() {
            let _ = write!(out, "{label:<4}");
            for j in 0..COORDINATE_LABELS.len() {
                let _ = write!(out, "{:>16.10}", clean(m[(i, j)]));
            }
            out.push('\n');
        }
    }
    out
}

/// Writes `text` to `path`, replacing any existing file.
pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn config(overrides: &[&str]) -> RunConfig {
        let mut raw = RawConfig::defaults();
        for o in overrides {
            raw.merge_override(o).unwrap();
        }
        RunConfig::from_raw(&raw).unwrap()
    }

    #[test]
    fn equilibrium_rows_are_constant() {
        for model in ["reduced", "full", "multiplier", "rescaled"] {
            let cfg = config(&[
                "k=0,0,0",
                "steps=50",
                "stride=10",
                &format!("model={model}"),
            ]);
            let t = simulate(&cfg).unwrap();
            assert_eq!(t.rows.len(), 6);
            let k1 = t.column("K1").unwrap();
            assert!(k1.iter().all(|v| *v == 0.0), "{model}");
            let g3 = t.column("g3").unwrap();
            assert!(g3.iter().all(|v| *v == g3[0]), "{model}");
        }
    }

    #[test]
    fn model_specific_columns() {
        let full = simulate(&config(&["model=full", "steps=10"])).unwrap();
        assert_eq!(full.header.len(), 11 + 9 + 3);
        let mult = simulate(&config(&["model=multiplier", "steps=10"])).unwrap();
        assert_eq!(mult.header.last().unwrap(), "res_y");
        let res = mult.column("res_x").unwrap();
        assert!(res.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn uniform_inertia_time_column() {
        let cfg = config(&["model=rescaled", "inertia=1,1,1", "steps=1000", "stride=50"]);
        let t = simulate(&cfg).unwrap();
        let factor = 0.5f64.sqrt();
        for (time, tau) in t.column("t").unwrap().iter().zip(t.column("tau").unwrap()) {
            assert!((time - factor * tau).abs() < 1e-10);
        }
    }

    #[test]
    fn bracket_table_hand_values() {
        let cfg = config(&["k=1,0,0", "gamma=0,0,1"]);
        let text = bracket_tables(&cfg);
        let block = |name: &str| {
            let start = text.find(&format!("\n{name}\n")).unwrap();
            text[start..].lines().nth(4).unwrap().to_string()
        };
        // row K2 holds {K2, K3}
        let std_row = block("standard");
        let aff_row = block("affine");
        assert_eq!(std_row.split_whitespace().nth(3), Some("-1.5000000000"));
        assert_eq!(aff_row.split_whitespace().nth(3), Some("-1.0000000000"));
        assert!(!text.contains("-0.0000000000"));
    }

    #[test]
    fn suite_selection() {
        assert_eq!(select_suites("all").unwrap().len(), Suite::ALL.len());
        assert_eq!(select_suites("jacobi").unwrap(), vec![Suite::Jacobi]);
        assert!(matches!(
            select_suites("everything"),
            Err(CliError::Config(_))
        ));
    }
}
