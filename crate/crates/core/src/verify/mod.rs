//! Batch numerical certification of the structural properties of the reduced
//! brackets and flow.
//!
//! Every check produces a [`CheckResult`] with its worst-case value and the
//! tolerance it was judged against. Checks that certify that something is
//! *generically nonzero* use a percentile rule: at least
//! [`VerifyConfig::generic_fraction`] of the samples must exceed the threshold,
//! since isolated states can annihilate the quantity.

mod checks;
mod report;
mod sampling;

pub use checks::{
    alpha_annihilation, alpha_form, alpha_pairing_max, casimir_suite, conservation_check,
    dynamics_agreement, flow_commutator_defect, involution_and_commutation, jacobi_check,
    jacobi_suite, measure_suite, nonintegrability_functional, nonintegrability_suite,
    reduction_consistency, reduction_defect, reduction_order, rescaled_suite, JacobiExpectation,
};
pub use report::{CheckResult, VerificationReport};
pub use sampling::SampleSpec;

use crate::brackets::BracketVariant;
use crate::dynamics::MultiplierState;
use crate::model::{ReducedState, SphereParams};
use crate::so3::{exp_rotation, Vec3};

/// Tolerances, thresholds and fixed states for every check.
///
/// The defaults are the frozen acceptance values. The two "generically nonzero"
/// Jacobi thresholds and the standard-bracket Casimir threshold come from a
/// finite-difference calibration run on m = 1, r = 1, 𝕀 = diag(1, 2, 3):
/// over 300 random states the smallest standard Jacobiator was 0.249, the
/// first percentile of the affine Jacobiator was 0.024, and the first
/// percentile of `max_i |{K_i, K·γ}|` under the standard bracket was 0.106.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub sample: SampleSpec,
    pub generic_fraction: f64,

    pub jacobi_tol: f64,
    pub standard_jacobi_threshold: f64,
    pub affine_jacobi_threshold: f64,

    pub casimir_tol: f64,
    pub standard_casimir_threshold: f64,

    pub nonintegrability_samples: usize,
    pub alpha_tol: f64,
    pub dynamics_tol: f64,

    pub involution_tol: f64,
    pub commute_tol: f64,
    pub commute_s: f64,
    pub commute_t: f64,
    pub commute_dt: f64,
    pub commute_state: ReducedState,

    pub measure_tol: f64,
    pub measure_control_threshold: f64,

    pub consistency_tol: f64,
    pub consistency_time: f64,
    pub consistency_dt: f64,
    /// Coarse step for the refinement study; it is compared against half of itself.
    pub consistency_order_dt: f64,
    pub consistency_min_order: f64,
    pub consistency_attitude: Vec3,
    pub consistency_k: Vec3,

    pub conservation_tol: f64,
    pub conservation_dt: f64,
    pub conservation_steps: usize,
    pub conservation_state: ReducedState,

    pub rescaled_dtau: f64,
    pub rescaled_steps: usize,
    pub rescaled_tol: f64,
    pub rescaled_time_tol: f64,
    pub rescaled_uniform_inertia: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let generic = ReducedState::from_raw(Vec3::new(1.0, -0.5, 0.8), Vec3::new(0.36, 0.48, 0.8));
        Self {
            sample: SampleSpec::default(),
            generic_fraction: 0.99,
            jacobi_tol: 1e-9,
            standard_jacobi_threshold: 1e-2,
            affine_jacobi_threshold: 1e-3,
            casimir_tol: 1e-12,
            standard_casimir_threshold: 1e-3,
            nonintegrability_samples: 10_000,
            alpha_tol: 1e-12,
            dynamics_tol: 1e-12,
            involution_tol: 1e-12,
            commute_tol: 1e-6,
            commute_s: 0.1,
            commute_t: 0.1,
            commute_dt: 1e-4,
            commute_state: generic,
            measure_tol: 1e-6,
            measure_control_threshold: 1e-3,
            consistency_tol: 1e-6,
            consistency_time: 10.0,
            consistency_dt: 1e-3,
            consistency_order_dt: 0.04,
            consistency_min_order: 3.5,
            consistency_attitude: Vec3::new(0.3, -0.2, 0.5),
            consistency_k: Vec3::new(1.0, -0.5, 0.8),
            conservation_tol: 1e-8,
            conservation_dt: 1e-3,
            conservation_steps: 100_000,
            conservation_state: generic,
            rescaled_dtau: 1e-3,
            rescaled_steps: 10_000,
            rescaled_tol: 1e-12,
            rescaled_time_tol: 1e-10,
            rescaled_uniform_inertia: 1.0,
        }
    }
}

impl VerifyConfig {
    /// Initial data of the reduction-consistency run.
    pub fn consistency_initial(&self, p: &SphereParams) -> MultiplierState {
        MultiplierState::consistent(
            p,
            exp_rotation(&self.consistency_attitude),
            0.0,
            0.0,
            self.consistency_k,
        )
    }
}

/// Groups of checks selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Jacobi,
    Casimir,
    Nonintegrability,
    Alpha,
    Dynamics,
    Commute,
    Measure,
    Consistency,
    Conservation,
    Rescaled,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Self::Jacobi,
        Self::Casimir,
        Self::Nonintegrability,
        Self::Alpha,
        Self::Dynamics,
        Self::Commute,
        Self::Measure,
        Self::Consistency,
        Self::Conservation,
        Self::Rescaled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Jacobi => "jacobi",
            Self::Casimir => "casimir",
            Self::Nonintegrability => "nonintegrability",
            Self::Alpha => "alpha",
            Self::Dynamics => "dynamics",
            Self::Commute => "commute",
            Self::Measure => "measure",
            Self::Consistency => "consistency",
            Self::Conservation => "conservation",
            Self::Rescaled => "rescaled",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Runs the selected suites on the given bracket variants.
///
/// Errors inside a check become failed entries; the batch always completes.
pub fn run_suites(
    p: &SphereParams,
    cfg: &VerifyConfig,
    suites: &[Suite],
    variants: &[BracketVariant],
) -> VerificationReport {
    let seed = cfg.sample.seed;
    let mut report = VerificationReport::new(*p, seed);
    let failed = |name: &str, err: crate::Error| CheckResult::error(name, seed, &err);

    for suite in suites {
        match suite {
            Suite::Jacobi => {
                for &v in variants {
                    report.push(jacobi_suite(p, v, cfg));
                }
            }
            Suite::Casimir => {
                for &v in variants {
                    report.extend(casimir_suite(p, v, cfg));
                }
            }
            Suite::Nonintegrability => report.extend(nonintegrability_suite(p, cfg)),
            Suite::Alpha => report.push(alpha_annihilation(p, cfg)),
            Suite::Dynamics => report.extend(dynamics_agreement(p, cfg)),
            Suite::Commute => match involution_and_commutation(p, cfg) {
                Ok(entries) => report.extend(entries),
                Err(e) => report.push(failed("commute", e)),
            },
            Suite::Measure => report.extend(measure_suite(p, cfg)),
            Suite::Consistency => {
                let initial = cfg.consistency_initial(p);
                match reduction_consistency(p, &initial, cfg) {
                    Ok(r) => report.push(r),
                    Err(e) => report.push(failed("consistency", e)),
                }
                match reduction_order(p, &initial, cfg) {
                    Ok(r) => report.push(r),
                    Err(e) => report.push(failed("consistency_order", e)),
                }
            }
            Suite::Conservation => match conservation_check(p, cfg) {
                Ok(r) => report.push(r),
                Err(e) => report.push(failed("conservation", e)),
            },
            Suite::Rescaled => match rescaled_suite(p, cfg) {
                Ok(rs) => report.extend(rs),
                Err(e) => report.push(failed("rescaled", e)),
            },
        }
    }
    report
}

/// Every suite on every bracket variant.
pub fn run_all(p: &SphereParams, cfg: &VerifyConfig) -> VerificationReport {
    run_suites(p, cfg, &Suite::ALL, &BracketVariant::ALL)
}
