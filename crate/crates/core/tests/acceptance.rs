//! Acceptance run on m = 1, r = 1, 𝕀 = diag(1, 2, 3) with seed 42.
//!
//! Prints one line per criterion and exits non-zero if any of them fails.

use std::process::ExitCode;
use std::time::Instant;

use chaplygin::brackets::BracketVariant;
use chaplygin::verify::{
    alpha_annihilation, casimir_suite, conservation_check, dynamics_agreement,
    involution_and_commutation, jacobi_suite, measure_suite, nonintegrability_functional,
    nonintegrability_suite, reduction_consistency, reduction_order, rescaled_suite, CheckResult,
    SampleSpec, VerifyConfig,
};
use chaplygin::{SphereParams, Vec3};

const SEED: u64 = 42;
const SAMPLES: usize = 1000;

const JACOBI_TOL: f64 = 1e-9;
const STANDARD_JACOBI_THRESHOLD: f64 = 1e-2;
const AFFINE_JACOBI_THRESHOLD: f64 = 1e-3;
const GENERIC_FRACTION: f64 = 0.99;
const CASIMIR_TOL: f64 = 1e-12;
const STANDARD_CASIMIR_THRESHOLD: f64 = 1e-3;
const NONINTEGRABILITY_SAMPLES: usize = 10_000;
const UNIFORM_FUNCTIONAL_TOL: f64 = 1e-14;
const ALPHA_TOL: f64 = 1e-12;
const CONSERVATION_TOL: f64 = 1e-8;
const CONSERVATION_STEPS: usize = 100_000;
const CONSERVATION_DT: f64 = 1e-3;
const MEASURE_TOL: f64 = 1e-6;
const MEASURE_CONTROL_THRESHOLD: f64 = 1e-3;
const DYNAMICS_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-6;
const CONSISTENCY_TIME: f64 = 10.0;
const CONSISTENCY_DT: f64 = 1e-3;
const CONSISTENCY_MIN_ORDER: f64 = 3.5;
const COMMUTE_TOL: f64 = 1e-6;
const COMMUTE_TIME: f64 = 0.1;
const COMMUTE_DT: f64 = 1e-4;
const RESCALED_TOL: f64 = 1e-12;
const RESCALED_TIME_TOL: f64 = 1e-10;

fn config() -> VerifyConfig {
    VerifyConfig {
        sample: SampleSpec {
            count: SAMPLES,
            seed: SEED,
            k_half_width: 3.0,
        },
        generic_fraction: GENERIC_FRACTION,
        jacobi_tol: JACOBI_TOL,
        standard_jacobi_threshold: STANDARD_JACOBI_THRESHOLD,
        affine_jacobi_threshold: AFFINE_JACOBI_THRESHOLD,
        casimir_tol: CASIMIR_TOL,
        standard_casimir_threshold: STANDARD_CASIMIR_THRESHOLD,
        nonintegrability_samples: NONINTEGRABILITY_SAMPLES,
        alpha_tol: ALPHA_TOL,
        dynamics_tol: DYNAMICS_TOL,
        commute_tol: COMMUTE_TOL,
        commute_s: COMMUTE_TIME,
        commute_t: COMMUTE_TIME,
        commute_dt: COMMUTE_DT,
        measure_tol: MEASURE_TOL,
        measure_control_threshold: MEASURE_CONTROL_THRESHOLD,
        consistency_tol: CONSISTENCY_TOL,
        consistency_time: CONSISTENCY_TIME,
        consistency_dt: CONSISTENCY_DT,
        consistency_min_order: CONSISTENCY_MIN_ORDER,
        conservation_tol: CONSERVATION_TOL,
        conservation_dt: CONSERVATION_DT,
        conservation_steps: CONSERVATION_STEPS,
        rescaled_tol: RESCALED_TOL,
        rescaled_time_tol: RESCALED_TIME_TOL,
        ..VerifyConfig::default()
    }
}

struct Criterion {
    number: usize,
    title: &'static str,
    checks: Vec<CheckResult>,
}

impl Criterion {
    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

fn unwrap_checks(
    name: &str,
    seed: u64,
    r: chaplygin::Result<Vec<CheckResult>>,
) -> Vec<CheckResult> {
    r.unwrap_or_else(|e| vec![CheckResult::error(name, seed, &e)])
}

fn uniform_functional_check(cfg: &VerifyConfig) -> CheckResult {
    let p = SphereParams::new(1.0, 1.0, Vec3::repeat(1.0)).expect("valid parameters");
    let worst = cfg
        .sample
        .unit_vectors(NONINTEGRABILITY_SAMPLES)
        .iter()
        .map(|g| (nonintegrability_functional(&p, g) - 1.0).abs())
        .fold(0.0, f64::max);
    CheckResult {
        name: "nonintegrability_uniform".into(),
        passed: worst < UNIFORM_FUNCTIONAL_TOL,
        worst,
        tolerance: UNIFORM_FUNCTIONAL_TOL,
        samples: NONINTEGRABILITY_SAMPLES,
        seed: cfg.sample.seed,
        witness: None,
        detail: String::new(),
    }
}

fn main() -> ExitCode {
    let p = SphereParams::canonical();
    let cfg = config();
    let seed = cfg.sample.seed;
    let start = Instant::now();

    let criteria = vec![
        Criterion {
            number: 1,
            title: "scaled bracket satisfies Jacobi",
            checks: vec![jacobi_suite(&p, BracketVariant::Scaled, &cfg)],
        },
        Criterion {
            number: 2,
            title: "standard bracket certified non-Jacobi",
            checks: vec![jacobi_suite(&p, BracketVariant::Standard, &cfg)],
        },
        Criterion {
            number: 3,
            title: "Casimirs of the reduced brackets",
            checks: BracketVariant::ALL
                .iter()
                .flat_map(|&v| casimir_suite(&p, v, &cfg))
                .collect(),
        },
        Criterion {
            number: 4,
            title: "non-integrability functional positive",
            checks: {
                let mut c = nonintegrability_suite(&p, &cfg);
                c.push(uniform_functional_check(&cfg));
                c
            },
        },
        Criterion {
            number: 5,
            title: "alpha annihilates the coordinate fields",
            checks: vec![alpha_annihilation(&p, &cfg)],
        },
        Criterion {
            number: 6,
            title: "first integrals conserved",
            checks: unwrap_checks(
                "conservation",
                seed,
                conservation_check(&p, &cfg).map(|c| vec![c]),
            ),
        },
        Criterion {
            number: 7,
            title: "invariant measure with unweighted control",
            checks: measure_suite(&p, &cfg),
        },
        Criterion {
            number: 8,
            title: "bracket Hamiltonian field equals equations of motion",
            checks: dynamics_agreement(&p, &cfg),
        },
        Criterion {
            number: 9,
            title: "multiplier dynamics project onto reduced dynamics",
            checks: {
                let initial = cfg.consistency_initial(&p);
                let mut c = unwrap_checks(
                    "consistency",
                    seed,
                    reduction_consistency(&p, &initial, &cfg).map(|c| vec![c]),
                );
                c.extend(unwrap_checks(
                    "consistency_order",
                    seed,
                    reduction_order(&p, &initial, &cfg).map(|c| vec![c]),
                ));
                c
            },
        },
        Criterion {
            number: 10,
            title: "rescaled flows of H and J commute",
            checks: unwrap_checks("commute", seed, involution_and_commutation(&p, &cfg)),
        },
        Criterion {
            number: 11,
            title: "rescaled-time integration",
            checks: unwrap_checks("rescaled", seed, rescaled_suite(&p, &cfg)),
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let parts: Vec<String> = c
            .checks
            .iter()
            .map(|r| {
                format!(
                    "{}{}={:.3e}/{:e}",
                    if r.passed { "" } else { "!" },
                    r.name,
                    r.worst,
                    r.tolerance
                )
            })
            .collect();
        println!(
            "criterion {:>2} {status}: {} [{}]",
            c.number,
            c.title,
            parts.join(" ")
        );
        if !c.passed() {
            failed += 1;
            for r in c.checks.iter().filter(|r| !r.passed) {
                println!("    {r}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
