use rayon::prelude::*;

use super::{CheckResult, VerifyConfig};
use crate::brackets::{
    bracket_eval, ham_vector_field, BracketTable, BracketVariant, Energy, GammaNormSquared,
    HalfMomentumSquared, Jacobiator, ReducedBracket, ScalarField, VerticalMomentum,
};
use crate::dynamics::{
    divergence_unweighted, divergence_weighted, integrate, integrate_rescaled, multiplier_rhs,
    reduced_rhs, rk4_step, Constraints, IntegrateOptions, MultiplierState, PhaseSpace,
};
use crate::model::{ReducedState, SphereParams};
use crate::so3::Vec3;
use crate::{Error, Result, Vec6};

/// Below this `mr²` the corrections distinguishing the three brackets are
/// negligible and all of them are expected to satisfy Jacobi.
const LIGHT_SPHERE_MR2: f64 = 1e-12;

/// What a Jacobi check is meant to certify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobiExpectation {
    /// Jacobiator below `jacobi_tol` at every sample.
    Poisson,
    /// Jacobiator above `threshold` at the configured fraction of samples.
    GenericallyNonzero { threshold: f64 },
}

impl JacobiExpectation {
    pub fn for_variant(p: &SphereParams, variant: BracketVariant, cfg: &VerifyConfig) -> Self {
        if p.mr2() <= LIGHT_SPHERE_MR2 {
            return Self::Poisson;
        }
        match variant {
            BracketVariant::Scaled => Self::Poisson,
            BracketVariant::Standard => Self::GenericallyNonzero {
                threshold: cfg.standard_jacobi_threshold,
            },
            BracketVariant::Affine => Self::GenericallyNonzero {
                threshold: cfg.affine_jacobi_threshold,
            },
        }
    }
}

fn entry(name: &str, cfg: &VerifyConfig) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        worst: f64::NAN,
        tolerance: f64::NAN,
        samples: 0,
        seed: cfg.sample.seed,
        witness: None,
        detail: String::new(),
    }
}

/// Passes iff every value is below `tol`; NaN counts as a failure.
fn upper_bound(
    name: &str,
    cfg: &VerifyConfig,
    values: &[f64],
    states: &[ReducedState],
    tol: f64,
) -> CheckResult {
    let mut worst = (0.0, 0);
    for (i, &v) in values.iter().enumerate() {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > worst.0 || i == 0 {
            worst = (v, i);
        }
    }
    CheckResult {
        passed: worst.0 < tol,
        worst: worst.0,
        tolerance: tol,
        samples: values.len(),
        witness: states.get(worst.1).copied(),
        ..entry(name, cfg)
    }
}

/// Passes iff at least `fraction` of the values exceed `threshold`.
///
/// `worst` is the order statistic that decides the outcome; the witness is the
/// sample with the smallest value.
fn generically_above(
    name: &str,
    cfg: &VerifyConfig,
    values: &[f64],
    states: &[ReducedState],
    threshold: f64,
) -> CheckResult {
    let n = values.len();
    let clean: Vec<f64> = values
        .iter()
        .map(|v| if v.is_nan() { f64::NEG_INFINITY } else { *v })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| clean[a].total_cmp(&clean[b]));
    let required = ((cfg.generic_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let allowed = n.saturating_sub(required.min(n));
    let decisive = clean[order[allowed.min(n - 1)]];
    let above = clean.iter().filter(|v| **v > threshold).count();
    CheckResult {
        passed: above >= required,
        worst: decisive,
        tolerance: threshold,
        samples: n,
        witness: states.get(order[0]).copied(),
        detail: format!("{above}/{n} samples above threshold"),
        ..entry(name, cfg)
    }
}

fn sampled(cfg: &VerifyConfig) -> Result<Vec<ReducedState>> {
    cfg.sample.validate()?;
    Ok(cfg.sample.states())
}

/// Jacobi certification of an arbitrary table.
pub fn jacobi_check(
    table: &dyn BracketTable,
    name: &str,
    expectation: JacobiExpectation,
    cfg: &VerifyConfig,
) -> CheckResult {
    let states = match sampled(cfg) {
        Ok(s) => s,
        Err(e) => return CheckResult::error(name, cfg.sample.seed, &e),
    };
    let values: Vec<f64> = states
        .par_iter()
        .map(|s| Jacobiator::new(table, s).max_abs().0)
        .collect();
    match expectation {
        JacobiExpectation::Poisson => upper_bound(name, cfg, &values, &states, cfg.jacobi_tol),
        JacobiExpectation::GenericallyNonzero { threshold } => {
            generically_above(name, cfg, &values, &states, threshold)
        }
    }
}

/// Jacobi certification of a built-in variant: Poisson for the scaled bracket,
/// certified non-Jacobi for the standard and affine brackets.
pub fn jacobi_suite(p: &SphereParams, variant: BracketVariant, cfg: &VerifyConfig) -> CheckResult {
    let table = ReducedBracket::new(*p, variant);
    let expectation = JacobiExpectation::for_variant(p, variant, cfg);
    jacobi_check(&table, &format!("jacobi_{variant}"), expectation, cfg)
}

/// `max_i |{z_i, C}|`.
fn casimir_defect(table: &dyn BracketTable, c: &dyn ScalarField, s: &ReducedState) -> f64 {
    ham_vector_field(table, c, s).amax()
}

/// `‖γ‖²` and `K·γ` Casimir checks for one variant.
pub fn casimir_suite(
    p: &SphereParams,
    variant: BracketVariant,
    cfg: &VerifyConfig,
) -> Vec<CheckResult> {
    let name_g = format!("casimir_gamma2_{variant}");
    let name_k = format!("casimir_kgamma_{variant}");
    let states = match sampled(cfg) {
        Ok(s) => s,
        Err(e) => return vec![CheckResult::error(&name_g, cfg.sample.seed, &e)],
    };
    let table = ReducedBracket::new(*p, variant);
    let (g2, kg): (Vec<f64>, Vec<f64>) = states
        .par_iter()
        .map(|s| {
            (
                casimir_defect(&table, &GammaNormSquared, s),
                casimir_defect(&table, &VerticalMomentum, s),
            )
        })
        .unzip();

    let gamma_check = upper_bound(&name_g, cfg, &g2, &states, cfg.casimir_tol);
    let k_check = if variant == BracketVariant::Standard && p.mr2() > LIGHT_SPHERE_MR2 {
        generically_above(&name_k, cfg, &kg, &states, cfg.standard_casimir_threshold)
    } else {
        upper_bound(&name_k, cfg, &kg, &states, cfg.casimir_tol)
    };
    vec![gamma_check, k_check]
}

/// `trace T(γ) − γᵀ T(γ) γ`.
pub fn nonintegrability_functional(p: &SphereParams, gamma: &Vec3) -> f64 {
    let t = p.t_matrix(gamma);
    t.trace() - gamma.dot(&(t * gamma))
}

/// Positivity of the functional at random unit `γ`, for the given inertia and
/// for a nearly symmetric one.
pub fn nonintegrability_suite(p: &SphereParams, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let gammas = cfg.sample.unit_vectors(cfg.nonintegrability_samples);
    let check = |name: &str, q: &SphereParams| {
        let values: Vec<f64> = gammas
            .par_iter()
            .map(|g| nonintegrability_functional(q, g))
            .collect();
        let (i, min) =
            values
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |(bi, bv), (i, v)| {
                    if v < bv || v.is_nan() && !bv.is_nan() {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                });
        CheckResult {
            passed: min > 0.0,
            worst: min,
            tolerance: 0.0,
            samples: values.len(),
            witness: gammas
                .get(i)
                .map(|g| ReducedState::from_raw(Vec3::zeros(), *g)),
            detail: "minimum must be strictly positive".into(),
            ..entry(name, cfg)
        }
    };
    let mut out = vec![check("nonintegrability", p)];
    match SphereParams::new(p.mass(), p.radius(), Vec3::new(1.0, 1.0, 1.0 + 1e-6)) {
        Ok(q) => out.push(check("nonintegrability_near_symmetric", &q)),
        Err(e) => out.push(CheckResult::error(
            "nonintegrability_near_symmetric",
            cfg.sample.seed,
            &e,
        )),
    }
    out
}

/// The one-form `α = γ·dK + (K + mr²ω)·dγ`, or `γ·dK + K·dγ` without the
/// rolling correction.
pub fn alpha_form(p: &SphereParams, s: &ReducedState, with_rolling_term: bool) -> Vec6 {
    let fiber = if with_rolling_term {
        s.k + p.omega_body(s) * p.mr2()
    } else {
        s.k
    };
    ReducedState::from_raw(s.gamma, fiber).to_vec6()
}

/// `max_i |⟨α, X_{z_i}⟩|` over the coordinate fields of the standard bracket.
pub fn alpha_pairing_max(p: &SphereParams, s: &ReducedState, with_rolling_term: bool) -> f64 {
    let lambda = ReducedBracket::new(*p, BracketVariant::Standard).coefficients(s);
    let alpha = alpha_form(p, s, with_rolling_term);
    (lambda.transpose() * alpha).amax()
}

pub fn alpha_annihilation(p: &SphereParams, cfg: &VerifyConfig) -> CheckResult {
    let name = "alpha";
    let states = match sampled(cfg) {
        Ok(s) => s,
        Err(e) => return CheckResult::error(name, cfg.sample.seed, &e),
    };
    let values: Vec<f64> = states
        .par_iter()
        .map(|s| alpha_pairing_max(p, s, true))
        .collect();
    upper_bound(name, cfg, &values, &states, cfg.alpha_tol)
}

/// Largest `|Λ∇H − (K × ω, γ × ω)|` for the standard and affine tables.
pub fn dynamics_agreement(p: &SphereParams, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for variant in [BracketVariant::Standard, BracketVariant::Affine] {
        let name = format!("dynamics_{variant}");
        let states = match sampled(cfg) {
            Ok(s) => s,
            Err(e) => return vec![CheckResult::error(&name, cfg.sample.seed, &e)],
        };
        let table = ReducedBracket::new(*p, variant);
        let energy = Energy(*p);
        let values: Vec<f64> = states
            .par_iter()
            .map(|s| (ham_vector_field(&table, &energy, s) - reduced_rhs(p, s)).amax())
            .collect();
        out.push(upper_bound(&name, cfg, &values, &states, cfg.dynamics_tol));
    }
    out
}

fn flow(
    table: &dyn BracketTable,
    f: &dyn ScalarField,
    s0: ReducedState,
    time: f64,
    dt: f64,
) -> Result<ReducedState> {
    let steps = (time / dt).round() as usize;
    let rhs = |s: &ReducedState| -> Result<Vec6> { Ok(ham_vector_field(table, f, s)) };
    let mut s = s0;
    for n in 1..=steps {
        s = rk4_step(&rhs, &s, dt)?;
        if !s.is_finite() {
            return Err(Error::NonFinite { step: n });
        }
    }
    Ok(s)
}

/// `‖Φ^J_s(Φ^H_t(s0)) − Φ^H_t(Φ^J_s(s0))‖` for the Hamiltonian fields of `H`
/// and `J = ½K·K` under the scaled (or plain affine) table.
pub fn flow_commutator_defect(
    p: &SphereParams,
    s0: &ReducedState,
    s: f64,
    t: f64,
    dt: f64,
    scaled: bool,
) -> Result<f64> {
    for (name, v) in [("s", s), ("t", t)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("flow time must be finite and non-negative, got {v}"),
            });
        }
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be finite and positive, got {dt}"),
        });
    }
    let variant = if scaled {
        BracketVariant::Scaled
    } else {
        BracketVariant::Affine
    };
    let table = ReducedBracket::new(*p, variant);
    let h = Energy(*p);
    let j = HalfMomentumSquared;
    let hj = flow(&table, &j, flow(&table, &h, *s0, t, dt)?, s, dt)?;
    let jh = flow(&table, &h, flow(&table, &j, *s0, s, dt)?, t, dt)?;
    Ok((hj.to_vec6() - jh.to_vec6()).norm())
}

/// `{H, J}` under every table, then commutation of the rescaled flows of `H`
/// and `J`, with the unscaled pair as a negative control.
pub fn involution_and_commutation(
    p: &SphereParams,
    cfg: &VerifyConfig,
) -> Result<Vec<CheckResult>> {
    let s0 = cfg.commute_state;
    let h = Energy(*p);
    let involution = BracketVariant::ALL
        .iter()
        .map(|&v| bracket_eval(&ReducedBracket::new(*p, v), &h, &HalfMomentumSquared, &s0).abs())
        .fold(0.0, f64::max);

    let scaled =
        flow_commutator_defect(p, &s0, cfg.commute_s, cfg.commute_t, cfg.commute_dt, true)?;
    let unscaled =
        flow_commutator_defect(p, &s0, cfg.commute_s, cfg.commute_t, cfg.commute_dt, false)?;

    Ok(vec![
        CheckResult {
            passed: involution < cfg.involution_tol,
            worst: involution,
            tolerance: cfg.involution_tol,
            samples: 1,
            witness: Some(s0),
            ..entry("involution", cfg)
        },
        CheckResult {
            passed: scaled < cfg.commute_tol,
            worst: scaled,
            tolerance: cfg.commute_tol,
            samples: 1,
            witness: Some(s0),
            ..entry("commute", cfg)
        },
        CheckResult {
            passed: unscaled > cfg.commute_tol,
            worst: unscaled,
            tolerance: cfg.commute_tol,
            samples: 1,
            witness: Some(s0),
            detail: "unscaled fields must fail to commute".into(),
            ..entry("commute_unscaled_control", cfg)
        },
    ])
}

/// Weighted divergence below tolerance everywhere; unweighted divergence
/// generically above the control threshold.
pub fn measure_suite(p: &SphereParams, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let states = match sampled(cfg) {
        Ok(s) => s,
        Err(e) => return vec![CheckResult::error("measure", cfg.sample.seed, &e)],
    };
    let (weighted, plain): (Vec<f64>, Vec<f64>) = states
        .par_iter()
        .map(|s| {
            (
                divergence_weighted(p, s).abs(),
                divergence_unweighted(p, s).abs(),
            )
        })
        .unzip();
    vec![
        upper_bound("measure", cfg, &weighted, &states, cfg.measure_tol),
        generically_above(
            "measure_control",
            cfg,
            &plain,
            &states,
            cfg.measure_control_threshold,
        ),
    ]
}

fn step_count(time: f64, dt: f64) -> Result<usize> {
    if !(time.is_finite() && time > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "consistency",
            reason: format!("time {time} and step {dt} must be finite and positive"),
        });
    }
    Ok(((time / dt).round() as usize).max(1))
}

/// Largest distance between the projected multiplier trajectory and the
/// reduced trajectory, over all steps.
pub fn reduction_defect(
    p: &SphereParams,
    initial: &MultiplierState,
    time: f64,
    dt: f64,
) -> Result<f64> {
    let steps = step_count(time, dt)?;
    let opts = IntegrateOptions::default();
    let full = integrate(
        p,
        |s: &MultiplierState| Ok(multiplier_rhs(p, s, Constraints::Rolling)?.rates),
        *initial,
        dt,
        steps,
        &opts,
    )?;
    let reduced = integrate(
        p,
        |s: &ReducedState| Ok(reduced_rhs(p, s)),
        initial.reduced(p),
        dt,
        steps,
        &opts,
    )?;
    Ok(full
        .samples
        .iter()
        .zip(&reduced.samples)
        .map(|(a, b)| (a.state.reduced(p).to_vec6() - b.state.to_vec6()).norm())
        .fold(0.0, f64::max))
}

pub fn reduction_consistency(
    p: &SphereParams,
    initial: &MultiplierState,
    cfg: &VerifyConfig,
) -> Result<CheckResult> {
    let d = reduction_defect(p, initial, cfg.consistency_time, cfg.consistency_dt)?;
    Ok(CheckResult {
        passed: d < cfg.consistency_tol,
        worst: d,
        tolerance: cfg.consistency_tol,
        samples: step_count(cfg.consistency_time, cfg.consistency_dt)? + 1,
        witness: Some(initial.reduced(p)),
        ..entry("consistency", cfg)
    })
}

/// Observed convergence order `log₂(d(h)/d(h/2))` of the reduction defect.
pub fn reduction_order(
    p: &SphereParams,
    initial: &MultiplierState,
    cfg: &VerifyConfig,
) -> Result<CheckResult> {
    let h = cfg.consistency_order_dt;
    let coarse = reduction_defect(p, initial, cfg.consistency_time, h)?;
    let fine = reduction_defect(p, initial, cfg.consistency_time, h / 2.0)?;
    let order = (coarse / fine).log2();
    Ok(CheckResult {
        passed: order >= cfg.consistency_min_order,
        worst: order,
        tolerance: cfg.consistency_min_order,
        samples: 2,
        witness: Some(initial.reduced(p)),
        detail: format!(
            "defect {coarse:e} at step {h}, {fine:e} at step {}",
            h / 2.0
        ),
        ..entry("consistency_order", cfg)
    })
}

/// Relative drift of `H`, `J`, `K·γ` and `‖γ‖²` along one long reduced run.
pub fn conservation_check(p: &SphereParams, cfg: &VerifyConfig) -> Result<CheckResult> {
    let opts = IntegrateOptions {
        sample_stride: 100,
        ..Default::default()
    };
    let tr = integrate(
        p,
        |s: &ReducedState| Ok(reduced_rhs(p, s)),
        cfg.conservation_state,
        cfg.conservation_dt,
        cfg.conservation_steps,
        &opts,
    )?;
    let drift = tr.relative_drift();
    let worst = drift.iter().copied().fold(0.0, f64::max);
    Ok(CheckResult {
        passed: worst < cfg.conservation_tol,
        worst,
        tolerance: cfg.conservation_tol,
        samples: tr.samples.len(),
        witness: Some(cfg.conservation_state),
        detail: format!(
            "H {:e}, J {:e}, K.g {:e}, |g|^2 {:e}",
            drift[0], drift[1], drift[2], drift[3]
        ),
        ..entry("conservation", cfg)
    })
}

/// `integrate_rescaled` against direct integration of the scaled-table field,
/// and the physical-time column for uniform inertia.
pub fn rescaled_suite(p: &SphereParams, cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let s0 = cfg.conservation_state;
    let (dtau, steps) = (cfg.rescaled_dtau, cfg.rescaled_steps);
    let opts = IntegrateOptions::default();

    let rescaled = integrate_rescaled(p, s0, dtau, steps, &opts)?;
    let table = ReducedBracket::new(*p, BracketVariant::Scaled);
    let energy = Energy(*p);
    let direct = integrate(
        p,
        |s: &ReducedState| Ok(ham_vector_field(&table, &energy, s)),
        s0,
        dtau,
        steps,
        &opts,
    )?;
    let pointwise = rescaled
        .samples
        .iter()
        .zip(&direct.samples)
        .map(|(a, b)| (a.state.to_vec6() - b.state.to_vec6()).amax())
        .fold(0.0, f64::max);

    let uniform = SphereParams::new(
        p.mass(),
        p.radius(),
        Vec3::repeat(cfg.rescaled_uniform_inertia),
    )?;
    let uniform_run = integrate_rescaled(&uniform, s0, dtau, steps, &opts)?;
    let i0 = cfg.rescaled_uniform_inertia;
    let factor = (i0 / (i0 + uniform.mr2())).sqrt();
    let time_defect = uniform_run
        .samples
        .iter()
        .map(|smp| (smp.t - factor * smp.tau.unwrap_or(f64::NAN)).abs())
        .map(|d| if d.is_nan() { f64::INFINITY } else { d })
        .fold(0.0, f64::max);

    Ok(vec![
        CheckResult {
            passed: pointwise < cfg.rescaled_tol,
            worst: pointwise,
            tolerance: cfg.rescaled_tol,
            samples: rescaled.samples.len(),
            witness: Some(s0),
            ..entry("rescaled_flow", cfg)
        },
        CheckResult {
            passed: time_defect < cfg.rescaled_time_tol,
            worst: time_defect,
            tolerance: cfg.rescaled_time_tol,
            samples: uniform_run.samples.len(),
            witness: Some(s0),
            ..entry("rescaled_time", cfg)
        },
    ])
}
