//! Comma-separated trajectory files: one header line, then numeric rows
//! printed with 17 significant digits so they parse back bit-exactly.

use std::fmt::Write as _;

use chaplygin::dynamics::{FullState, MultiplierState, Sample, Trajectory};
use chaplygin::so3::orthonormality_defect;
use chaplygin::{Mat3, ReducedState, SphereParams};

use crate::CliError;

const REDUCED_COLUMNS: [&str; 10] = [
    "K1", "K2", "K3", "g1", "g2", "g3", "H", "J", "Kgamma", "gnorm",
];
const ROTATION_COLUMNS: [&str; 9] = [
    "R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn reduced_values<S>(s: &Sample<S>, z: &ReducedState) -> [f64; 10] {
    [
        z.k.x,
        z.k.y,
        z.k.z,
        z.gamma.x,
        z.gamma.y,
        z.gamma.z,
        s.integrals.energy,
        s.integrals.j,
        s.integrals.k_gamma,
        s.integrals.gamma_norm2,
    ]
}

fn rotation_values(g: &Mat3) -> impl Iterator<Item = f64> + '_ {
    (0..3).flat_map(move |i| (0..3).map(move |j| g[(i, j)]))
}

fn header(leading: &[&str], trailing: &[&str]) -> Vec<String> {
    leading
        .iter()
        .chain(REDUCED_COLUMNS.iter())
        .chain(trailing.iter())
        .map(|s| s.to_string())
        .collect()
}

impl Table {
    /// Columns `t, K1..K3, g1..g3, H, J, Kgamma, gnorm`, with `tau` after `t`
    /// for rescaled runs.
    pub fn from_reduced(tr: &Trajectory<ReducedState>) -> Self {
        let rescaled = tr.samples.iter().any(|s| s.tau.is_some());
        let lead: &[&str] = if rescaled { &["t", "tau"] } else { &["t"] };
        let rows = tr
            .samples
            .iter()
            .map(|s| {
                let mut row = vec![s.t];
                if rescaled {
                    row.push(s.tau.unwrap_or(f64::NAN));
                }
                row.extend(reduced_values(s, &s.state));
                row
            })
            .collect();
        Self {
            header: header(lead, &[]),
            rows,
        }
    }

    /// Reduced columns followed by the attitude, the contact position and the
    /// orthonormality defect of the attitude.
    pub fn from_full(tr: &Trajectory<FullState>) -> Self {
        let mut trailing: Vec<&str> = ROTATION_COLUMNS.to_vec();
        trailing.extend(["x", "y", "orth"]);
        let rows = tr
            .samples
            .iter()
            .map(|s| {
                let z = ReducedState::from_raw(s.state.k, s.state.gamma());
                let mut row = vec![s.t];
                row.extend(reduced_values(s, &z));
                row.extend(rotation_values(&s.state.g));
                row.extend([s.state.x, s.state.y, orthonormality_defect(&s.state.g)]);
                row
            })
            .collect();
        Self {
            header: header(&["t"], &trailing),
            rows,
        }
    }

    /// As [`Self::from_full`], plus the two constraint residuals.
    pub fn from_multiplier(p: &SphereParams, tr: &Trajectory<MultiplierState>) -> Self {
        use chaplygin::dynamics::PhaseSpace;
        let mut trailing: Vec<&str> = ROTATION_COLUMNS.to_vec();
        trailing.extend(["x", "y", "orth", "res_x", "res_y"]);
        let rows = tr
            .samples
            .iter()
            .map(|s| {
                let z = s.state.reduced(p);
                let [rx, ry] = s.state.constraint_residuals(p);
                let mut row = vec![s.t];
                row.extend(reduced_values(s, &z));
                row.extend(rotation_values(&s.state.g));
                row.extend([
                    s.state.x,
                    s.state.y,
                    orthonormality_defect(&s.state.g),
                    rx,
                    ry,
                ]);
                row
            })
            .collect();
        Self {
            header: header(&["t"], &trailing),
            rows,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, CliError> {
        let bad =
            |line: usize, why: String| CliError::Runtime(format!("trajectory line {line}: {why}"));
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| bad(1, "missing header".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| bad(n + 2, format!("'{v}': {e}")))
                })
                .collect::<Result<_, _>>()?;
            if row.len() != header.len() {
                return Err(bad(
                    n + 2,
                    format!("{} fields, header has {}", row.len(), header.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chaplygin::dynamics::{integrate, integrate_rescaled, reduced_rhs, IntegrateOptions};
    use chaplygin::Vec3;

    fn short_run() -> Trajectory<ReducedState> {
        let p = SphereParams::canonical();
        let s = ReducedState::new(Vec3::new(1.0, -0.5, 0.8), Vec3::new(0.36, 0.48, 0.8)).unwrap();
        integrate(
            &p,
            |z: &ReducedState| Ok(reduced_rhs(&p, z)),
            s,
            1e-2,
            20,
            &IntegrateOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn reduced_header_and_shape() {
        let t = Table::from_reduced(&short_run());
        assert_eq!(t.header.join(","), "t,K1,K2,K3,g1,g2,g3,H,J,Kgamma,gnorm");
        assert_eq!(t.rows.len(), 21);
        assert!(t.to_csv().ends_with('\n') && !t.to_csv().contains('\r'));
    }

    #[test]
    fn rescaled_header_has_tau() {
        let p = SphereParams::canonical();
        let s = ReducedState::new(Vec3::new(1.0, -0.5, 0.8), Vec3::new(0.36, 0.48, 0.8)).unwrap();
        let tr = integrate_rescaled(&p, s, 1e-2, 5, &IntegrateOptions::default()).unwrap();
        let t = Table::from_reduced(&tr);
        assert_eq!(&t.header[..3], &["t", "tau", "K1"]);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let t = Table::from_reduced(&short_run());
        let back = Table::parse_csv(&t.to_csv()).unwrap();
        assert_eq!(back.header, t.header);
        for (a, b) in t.rows.iter().zip(&back.rows) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(Table::parse_csv("a,b\n1,2\n3\n").is_err());
        assert!(Table::parse_csv("a\nx\n").is_err());
        assert!(Table::parse_csv("").is_err());
    }
}
