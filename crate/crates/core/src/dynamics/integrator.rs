//! Fixed-step classical Runge–Kutta integration with first-integral monitoring.

use std::ops::{Add, Mul};

use crate::model::{FirstIntegrals, ReducedState, SphereParams};
use crate::{Error, Result, Vec6};

/// A state space the integrator can step through.
pub trait PhaseSpace: Clone {
    type Tangent: Clone + Add<Output = Self::Tangent> + Mul<f64, Output = Self::Tangent>;

    /// `self + h·d`, treating the state as a point of its ambient vector space.
    fn shifted(&self, d: &Self::Tangent, h: f64) -> Self;

    fn is_finite(&self) -> bool;

    /// Projects back onto the constraint manifold (unit `γ`, orthonormal `g`).
    fn repair(&mut self) -> Result<()>;

    /// The induced point of the reduced space.
    fn reduced(&self, p: &SphereParams) -> ReducedState;
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    /// Repair the state every `k` steps; `None` disables repair.
    pub renormalize_every: Option<usize>,
    /// Record every `k`-th step. The final step is always recorded.
    pub sample_stride: usize,
    /// Internal RK4 substeps per step, for generating fine reference solutions.
    pub substeps: usize,
    /// Free-form description stored in the trajectory metadata.
    pub label: String,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            renormalize_every: None,
            sample_stride: 1,
            substeps: 1,
            label: String::from("custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    pub t: f64,
    /// Rescaled time, for trajectories produced by [`integrate_rescaled`].
    pub tau: Option<f64>,
    pub state: S,
    pub integrals: FirstIntegrals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub params: SphereParams,
    pub integrator: &'static str,
    pub step: f64,
    pub steps: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub samples: Vec<Sample<S>>,
    pub meta: TrajectoryMeta,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> &Sample<S> {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    /// Largest relative change of each first integral with respect to the first sample.
    ///
    /// Quantities that start at zero are compared in absolute terms.
    pub fn relative_drift(&self) -> [f64; 4] {
        let first = self.samples[0].integrals.as_array();
        let mut worst = [0.0f64; 4];
        for s in &self.samples {
            let now = s.integrals.as_array();
            for i in 0..4 {
                let scale = if first[i] != 0.0 { first[i].abs() } else { 1.0 };
                worst[i] = worst[i].max((now[i] - first[i]).abs() / scale);
            }
        }
        worst
    }
}

/// One classical RK4 step.
pub fn rk4_step<S, F>(rhs: &F, s: &S, dt: f64) -> Result<S>
where
    S: PhaseSpace,
    F: Fn(&S) -> Result<S::Tangent>,
{
    let k1 = rhs(s)?;
    let k2 = rhs(&s.shifted(&k1, 0.5 * dt))?;
    let k3 = rhs(&s.shifted(&k2, 0.5 * dt))?;
    let k4 = rhs(&s.shifted(&k3, dt))?;
    let sum = k1 + k2 * 2.0 + k3 * 2.0 + k4;
    Ok(s.shifted(&sum, dt / 6.0))
}

fn check_step(dt: f64, steps: usize, opts: &IntegrateOptions) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be finite and positive, got {dt}"),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            reason: "must be at least 1".into(),
        });
    }
    if opts.sample_stride == 0 || opts.substeps == 0 || opts.renormalize_every == Some(0) {
        return Err(Error::InvalidParameter {
            name: "options",
            reason: "stride, substeps and renormalization interval must be positive".into(),
        });
    }
    Ok(())
}

/// Runs `steps` fixed steps of size `dt` of `ż = rhs(z)` from `initial`.
pub fn integrate<S, F>(
    p: &SphereParams,
    rhs: F,
    initial: S,
    dt: f64,
    steps: usize,
    opts: &IntegrateOptions,
) -> Result<Trajectory<S>>
where
    S: PhaseSpace,
    F: Fn(&S) -> Result<S::Tangent>,
{
    check_step(dt, steps, opts)?;
    let sub_dt = dt / opts.substeps as f64;
    let mut samples = Vec::with_capacity(steps / opts.sample_stride + 2);
    let record = |state: &S, t: f64| Sample {
        t,
        tau: None,
        state: state.clone(),
        integrals: p.first_integrals(&state.reduced(p)),
    };

    let mut state = initial;
    samples.push(record(&state, 0.0));
    for n in 1..=steps {
        for _ in 0..opts.substeps {
            state = rk4_step(&rhs, &state, sub_dt)?;
        }
        if !state.is_finite() {
            return Err(Error::NonFinite { step: n });
        }
        if opts.renormalize_every.is_some_and(|k| n % k == 0) {
            state.repair()?;
        }
        if n % opts.sample_stride == 0 || n == steps {
            samples.push(record(&state, n as f64 * dt));
        }
    }

    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            params: *p,
            integrator: "rk4",
            step: dt,
            steps,
            label: opts.label.clone(),
        },
    })
}

/// Integrates `dz/dτ = μ(γ)·(K × ω, γ × ω)` and reconstructs `t = ∫ μ dτ`
/// with the trapezoidal rule on the step grid.
pub fn integrate_rescaled(
    p: &SphereParams,
    initial: ReducedState,
    dtau: f64,
    steps: usize,
    opts: &IntegrateOptions,
) -> Result<Trajectory<ReducedState>> {
    check_step(dtau, steps, opts)?;
    let rhs = |s: &ReducedState| -> Result<Vec6> { Ok(super::rescaled_rhs(p, s)) };
    let sub = dtau / opts.substeps as f64;

    let record = |state: &ReducedState, t: f64, tau: f64| Sample {
        t,
        tau: Some(tau),
        state: *state,
        integrals: p.first_integrals(state),
    };

    let mut state = initial;
    let mut t = 0.0;
    let mut mu_prev = p.mu(&state.gamma);
    let mut samples = vec![record(&state, 0.0, 0.0)];
    for n in 1..=steps {
        for _ in 0..opts.substeps {
            state = rk4_step(&rhs, &state, sub)?;
        }
        if !state.is_finite() {
            return Err(Error::NonFinite { step: n });
        }
        if opts.renormalize_every.is_some_and(|k| n % k == 0) {
            state.repair()?;
        }
        let mu = p.mu(&state.gamma);
        t += 0.5 * dtau * (mu_prev + mu);
        mu_prev = mu;
        if n % opts.sample_stride == 0 || n == steps {
            samples.push(record(&state, t, n as f64 * dtau));
        }
    }

    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            params: *p,
            integrator: "rk4",
            step: dtau,
            steps,
            label: if opts.label == "custom" {
                "rescaled".into()
            } else {
                opts.label.clone()
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{ham_vector_field, BracketVariant, Energy, ReducedBracket};
    use crate::dynamics::{full_rhs, reduced_rhs, FullState};
    use crate::so3::{exp_rotation, orthonormality_defect, poisson_vector, Vec3};

    fn generic() -> ReducedState {
        ReducedState::new(Vec3::new(1.0, -0.5, 0.8), Vec3::new(0.36, 0.48, 0.8)).unwrap()
    }

    fn reduced(p: SphereParams) -> impl Fn(&ReducedState) -> Result<Vec6> {
        move |s| Ok(reduced_rhs(&p, s))
    }

    #[test]
    fn rejects_bad_steps() {
        let p = SphereParams::canonical();
        let o = IntegrateOptions::default();
        assert!(integrate(&p, reduced(p), generic(), 0.0, 10, &o).is_err());
        assert!(integrate(&p, reduced(p), generic(), 1e-3, 0, &o).is_err());
        let bad = IntegrateOptions {
            sample_stride: 0,
            ..o
        };
        assert!(integrate(&p, reduced(p), generic(), 1e-3, 1, &bad).is_err());
    }

    #[test]
    fn equilibrium_stays_fixed() {
        let p = SphereParams::canonical();
        let s0 = ReducedState::new(Vec3::zeros(), Vec3::new(0.6, 0.0, 0.8)).unwrap();
        let tr = integrate(&p, reduced(p), s0, 1e-2, 100, &IntegrateOptions::default()).unwrap();
        assert!(tr.samples.iter().all(|s| s.state == s0));
        assert_eq!(tr.samples.len(), 101);
    }

    #[test]
    fn non_finite_state_reports_step() {
        let p = SphereParams::canonical();
        let blow_up = |s: &ReducedState| -> Result<Vec6> {
            let z = s.to_vec6();
            Ok(z.map(|v| v * v * 1e300))
        };
        let err = integrate(
            &p,
            blow_up,
            generic(),
            1.0,
            10,
            &IntegrateOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { step } if step >= 1));
    }

    #[test]
    fn sampling_stride_keeps_last_step() {
        let p = SphereParams::canonical();
        let opts = IntegrateOptions {
            sample_stride: 3,
            ..Default::default()
        };
        let tr = integrate(&p, reduced(p), generic(), 1e-2, 10, &opts).unwrap();
        let times: Vec<f64> = tr.samples.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 5);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!((times[4] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn fourth_order_self_convergence() {
        let p = SphereParams::canonical();
        let (t_end, dt) = (4.0, 0.08);
        let run = |dt: f64, substeps: usize| {
            let steps = (t_end / dt).round() as usize;
            let opts = IntegrateOptions {
                substeps,
                ..Default::default()
            };
            integrate(&p, reduced(p), generic(), dt, steps, &opts)
                .unwrap()
                .last()
                .state
        };
        let reference = run(dt, 64);
        let err = |s: ReducedState| (s.to_vec6() - reference.to_vec6()).norm();
        let coarse = err(run(dt, 1));
        let fine = err(run(dt, 2));
        let ratio = coarse / fine;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn full_state_orthonormality_without_repair() {
        let p = SphereParams::canonical();
        let g = exp_rotation(&Vec3::new(0.3, -0.2, 0.5));
        let s0 = FullState {
            g,
            x: 0.0,
            y: 0.0,
            k: Vec3::new(1.0, -0.5, 0.8),
        };
        let rhs = |s: &FullState| Ok(full_rhs(&p, s));
        let opts = IntegrateOptions {
            sample_stride: 1000,
            ..Default::default()
        };
        let tr = integrate(&p, rhs, s0, 1e-3, 10_000, &opts).unwrap();
        for s in &tr.samples {
            assert!(orthonormality_defect(&s.state.g) < 1e-9);
        }
        // reduced projection agrees with direct reduced integration
        let red = integrate(&p, reduced(p), s0.reduced(&p), 1e-3, 10_000, &opts).unwrap();
        for (a, b) in tr.samples.iter().zip(&red.samples) {
            assert!((a.state.k - b.state.k).norm() < 1e-10);
            assert!((poisson_vector(&a.state.g) - b.state.gamma).norm() < 1e-10);
        }
    }

    #[test]
    fn repair_restores_manifold() {
        let p = SphereParams::canonical();
        let g = exp_rotation(&Vec3::new(0.3, -0.2, 0.5));
        let s0 = FullState {
            g,
            x: 0.0,
            y: 0.0,
            k: Vec3::new(1.0, -0.5, 0.8),
        };
        let rhs = |s: &FullState| Ok(full_rhs(&p, s));
        let opts = IntegrateOptions {
            renormalize_every: Some(100),
            ..Default::default()
        };
        let tr = integrate(&p, rhs, s0, 5e-2, 1000, &opts).unwrap();
        assert!(orthonormality_defect(&tr.last().state.g) < 1e-14);

        let tr = integrate(&p, reduced(p), generic(), 5e-2, 1000, &opts).unwrap();
        assert!((tr.last().state.gamma.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rescaled_uniform_inertia_dilates_time() {
        let p = SphereParams::new(1.0, 1.0, Vec3::new(1.0, 1.0, 1.0)).unwrap();
        let tr =
            integrate_rescaled(&p, generic(), 1e-3, 5000, &IntegrateOptions::default()).unwrap();
        let factor = 0.5f64.sqrt();
        for s in &tr.samples {
            assert!((s.t - factor * s.tau.unwrap()).abs() < 1e-10);
        }
        // same orbit as the physical-time flow sampled at the matching times
        let phys = integrate(
            &p,
            reduced(p),
            generic(),
            1e-3 * factor,
            5000,
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!((phys.last().state.to_vec6() - tr.last().state.to_vec6()).norm() < 1e-12);
    }

    #[test]
    fn rescaled_flow_is_scaled_bracket_flow() {
        let p = SphereParams::canonical();
        let table = ReducedBracket::new(p, BracketVariant::Scaled);
        let by_bracket = |s: &ReducedState| Ok(ham_vector_field(&table, &Energy(p), s));
        let opts = IntegrateOptions::default();
        let a = integrate_rescaled(&p, generic(), 1e-3, 2000, &opts).unwrap();
        let b = integrate(&p, by_bracket, generic(), 1e-3, 2000, &opts).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.state.to_vec6() - y.state.to_vec6()).norm() < 1e-12);
        }
        let drift = a.relative_drift();
        assert!(drift.iter().all(|&d| d < 1e-10), "{drift:?}");
    }
}
