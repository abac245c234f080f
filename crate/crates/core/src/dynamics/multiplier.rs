//! Unreduced dynamics with explicit constraint reactions.
//!
//! The state carries the angular momentum about the centre of mass `M` (body
//! frame) and the linear momentum `(p_x, p_y)`. The free rigid-body flow is
//! corrected by reaction forces `(λ_x, λ_y)` acting along the constraint
//! one-forms `ε_x = dx − rρ₂`, `ε_y = dy + rρ₁`. The multipliers are whatever
//! keeps the residuals `p_x − mrω₂ˢ` and `p_y + mrω₁ˢ` constant in time.

use std::ops::{Add, Mul};

use super::PhaseSpace;
use crate::model::{ReducedState, SphereParams};
use crate::so3::{hat, poisson_vector, reorthonormalize, Mat3, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraints {
    Rolling,
    /// No reaction forces: the sphere moves as a free rigid body.
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierState {
    pub g: Mat3,
    pub x: f64,
    pub y: f64,
    /// Angular momentum about the centre of mass, body frame.
    pub m: Vec3,
    pub px: f64,
    pub py: f64,
}

impl MultiplierState {
    /// The point of the constraint manifold with attitude `g` and contact
    /// momentum `k` (body frame).
    pub fn consistent(p: &SphereParams, g: Mat3, x: f64, y: f64, k: Vec3) -> Self {
        let reduced = ReducedState::from_raw(k, poisson_vector(&g));
        let w = p.omega_body(&reduced);
        let ws = g * w;
        let mr = p.mass() * p.radius();
        Self {
            g,
            x,
            y,
            m: p.inertia().component_mul(&w),
            px: mr * ws.y,
            py: -mr * ws.x,
        }
    }

    pub fn omega_space(&self, p: &SphereParams) -> Vec3 {
        self.g * self.m.component_div(&p.inertia())
    }

    /// `(p_x − mrω₂ˢ, p_y + mrω₁ˢ)`.
    pub fn constraint_residuals(&self, p: &SphereParams) -> [f64; 2] {
        let ws = self.omega_space(p);
        let mr = p.mass() * p.radius();
        [self.px - mr * ws.y, self.py + mr * ws.x]
    }

    /// Contact-point angular momentum in the body frame:
    /// `Kˢ = Mˢ + r(−p_y, p_x, 0)`, `K = gᵀKˢ`.
    pub fn contact_momentum(&self, p: &SphereParams) -> Vec3 {
        let ks = self.g * self.m + Vec3::new(-self.py, self.px, 0.0) * p.radius();
        self.g.transpose() * ks
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierRates {
    pub g_dot: Mat3,
    pub x_dot: f64,
    pub y_dot: f64,
    pub m_dot: Vec3,
    pub px_dot: f64,
    pub py_dot: f64,
}

impl Add for MultiplierRates {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            g_dot: self.g_dot + o.g_dot,
            x_dot: self.x_dot + o.x_dot,
            y_dot: self.y_dot + o.y_dot,
            m_dot: self.m_dot + o.m_dot,
            px_dot: self.px_dot + o.px_dot,
            py_dot: self.py_dot + o.py_dot,
        }
    }
}

impl Mul<f64> for MultiplierRates {
    type Output = Self;

    fn mul(self, h: f64) -> Self {
        Self {
            g_dot: self.g_dot * h,
            x_dot: self.x_dot * h,
            y_dot: self.y_dot * h,
            m_dot: self.m_dot * h,
            px_dot: self.px_dot * h,
            py_dot: self.py_dot * h,
        }
    }
}

impl PhaseSpace for MultiplierState {
    type Tangent = MultiplierRates;

    fn shifted(&self, d: &MultiplierRates, h: f64) -> Self {
        Self {
            g: self.g + d.g_dot * h,
            x: self.x + d.x_dot * h,
            y: self.y + d.y_dot * h,
            m: self.m + d.m_dot * h,
            px: self.px + d.px_dot * h,
            py: self.py + d.py_dot * h,
        }
    }

    fn is_finite(&self) -> bool {
        self.g.iter().chain(self.m.iter()).all(|v| v.is_finite())
            && [self.x, self.y, self.px, self.py]
                .iter()
                .all(|v| v.is_finite())
    }

    fn repair(&mut self) -> Result<()> {
        self.g = reorthonormalize(&self.g)?;
        Ok(())
    }

    fn reduced(&self, p: &SphereParams) -> ReducedState {
        ReducedState::from_raw(self.contact_momentum(p), poisson_vector(&self.g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierRhs {
    pub rates: MultiplierRates,
    /// Reaction force `(λ_x, λ_y)` on the contact point.
    pub lambda: [f64; 2],
    /// Time derivative of the constraint residuals under `rates`.
    pub residual_rate: [f64; 2],
}

/// Hamilton's equations with multipliers for the sphere on the plane.
pub fn multiplier_rhs(
    p: &SphereParams,
    s: &MultiplierState,
    constraints: Constraints,
) -> Result<MultiplierRhs> {
    let inertia = p.inertia();
    let (m, r) = (p.mass(), p.radius());
    let mr = m * r;
    let mr2 = p.mr2();

    let w = s.m.component_div(&inertia);
    let free_m_dot = s.m.cross(&w);

    let lambda = match constraints {
        Constraints::Disabled => [0.0, 0.0],
        Constraints::Rolling => {
            // d/dt ωˢ = g 𝕀⁻¹ Ṁ = b + W τˢ with τˢ = r(λ_y, −λ_x, 0)
            let inv_i = Mat3::from_diagonal(&inertia.map(|v| 1.0 / v));
            let w_space = s.g * inv_i * s.g.transpose();
            let b = s.g * inv_i * free_m_dot;
            let a11 = 1.0 + mr2 * w_space[(1, 1)];
            let a12 = -mr2 * w_space[(1, 0)];
            let a21 = -mr2 * w_space[(0, 1)];
            let a22 = 1.0 + mr2 * w_space[(0, 0)];
            let det = a11 * a22 - a12 * a21;
            if !(det.is_finite() && det > 0.0) {
                return Err(Error::SingularConstraint { det });
            }
            let (r1, r2) = (mr * b.y, -mr * b.x);
            [(a22 * r1 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det]
        }
    };

    let torque_space = Vec3::new(r * lambda[1], -r * lambda[0], 0.0);
    let m_dot = free_m_dot + s.g.transpose() * torque_space;
    let rates = MultiplierRates {
        g_dot: s.g * hat(&w),
        x_dot: s.px / m,
        y_dot: s.py / m,
        m_dot,
        px_dot: lambda[0],
        py_dot: lambda[1],
    };

    let ws_dot = s.g * m_dot.component_div(&inertia);
    let residual_rate = [lambda[0] - mr * ws_dot.y, lambda[1] + mr * ws_dot.x];

    Ok(MultiplierRhs {
        rates,
        lambda,
        residual_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, reduced_rhs, IntegrateOptions};
    use crate::so3::exp_rotation;

    fn setup() -> (SphereParams, MultiplierState) {
        let p = SphereParams::canonical();
        let g = exp_rotation(&Vec3::new(0.3, -0.2, 0.5));
        let s = MultiplierState::consistent(&p, g, 0.0, 0.0, Vec3::new(1.0, -0.5, 0.8));
        (p, s)
    }

    #[test]
    fn consistent_state_has_zero_residuals_and_matching_k() {
        let (p, s) = setup();
        let res = s.constraint_residuals(&p);
        assert!(res[0].abs() < 1e-15 && res[1].abs() < 1e-15);
        assert!((s.contact_momentum(&p) - Vec3::new(1.0, -0.5, 0.8)).norm() < 1e-14);
    }

    #[test]
    fn multipliers_cancel_residual_rates() {
        let (p, s) = setup();
        let out = multiplier_rhs(&p, &s, Constraints::Rolling).unwrap();
        assert!(out.residual_rate.iter().all(|v| v.abs() < 1e-12));
        assert!(out.lambda.iter().any(|v| v.abs() > 1e-6));
    }

    #[test]
    fn induced_reduced_velocity_matches_reduced_rhs() {
        let (p, s) = setup();
        let out = multiplier_rhs(&p, &s, Constraints::Rolling).unwrap();
        let h = 1e-6;
        let fwd = s.shifted(&out.rates, h).reduced(&p).to_vec6();
        let bwd = s.shifted(&out.rates, -h).reduced(&p).to_vec6();
        let fd = (fwd - bwd) / (2.0 * h);
        assert!((fd - reduced_rhs(&p, &s.reduced(&p))).norm() < 1e-8);
    }

    #[test]
    fn disabled_constraints_give_free_rigid_body() {
        let (p, s) = setup();
        let out = multiplier_rhs(&p, &s, Constraints::Disabled).unwrap();
        assert_eq!(out.lambda, [0.0, 0.0]);
        let w = s.m.component_div(&p.inertia());
        assert_eq!(out.rates.m_dot, s.m.cross(&w));
        assert_eq!((out.rates.px_dot, out.rates.py_dot), (0.0, 0.0));
    }

    #[test]
    fn residuals_stay_small_over_long_run() {
        let (p, s) = setup();
        let rhs = |s: &MultiplierState| Ok(multiplier_rhs(&p, s, Constraints::Rolling)?.rates);
        let opts = IntegrateOptions {
            sample_stride: 100,
            ..Default::default()
        };
        let tr = integrate(&p, rhs, s, 1e-3, 10_000, &opts).unwrap();
        for sample in &tr.samples {
            let r = sample.state.constraint_residuals(&p);
            assert!(r[0].abs() < 1e-8 && r[1].abs() < 1e-8);
        }
    }
}
