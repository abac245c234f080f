//! Equations of motion of the rolling sphere.
//!
//! * [`reduced_rhs`]: `K̇ = K × ω`, `γ̇ = γ × ω` on the reduced space.
//! * [`full_rhs`]: the same flow lifted to attitude and contact position.
//! * [`multiplier::multiplier_rhs`]: the unreduced system written with centre of
//!   mass momenta and explicit constraint reactions, used as an independent check
//!   on the reduction.

mod integrator;
pub mod multiplier;

use std::ops::{Add, Mul};

pub use integrator::{
    integrate, integrate_rescaled, rk4_step, IntegrateOptions, PhaseSpace, Sample, Trajectory,
    TrajectoryMeta,
};
pub use multiplier::{multiplier_rhs, Constraints, MultiplierRhs, MultiplierState};

use crate::model::{DerivedKinematics, ReducedState, SphereParams};
use crate::so3::{hat, poisson_vector, reorthonormalize, Mat3, Vec3};
use crate::{Result, Vec6};

/// Step used by the finite-difference divergence.
pub const DIVERGENCE_STEP: f64 = 1e-5;

/// `(K × ω, γ × ω)`.
pub fn reduced_rhs(p: &SphereParams, s: &ReducedState) -> Vec6 {
    let w = p.omega_body(s);
    ReducedState::from_raw(s.k.cross(&w), s.gamma.cross(&w)).to_vec6()
}

/// The rescaled field `μ(γ) (K × ω, γ × ω)` generating the flow in time `τ`.
pub fn rescaled_rhs(p: &SphereParams, s: &ReducedState) -> Vec6 {
    reduced_rhs(p, s) * p.mu(&s.gamma)
}

/// Ambient divergence in ℝ⁶ of `μ(γ)⁻¹ (K × ω, γ × ω)` by central differences.
pub fn divergence_weighted(p: &SphereParams, s: &ReducedState) -> f64 {
    fd_divergence(s, |z| reduced_rhs(p, z) / p.mu(&z.gamma))
}

/// Ambient divergence of the plain reduced field, by the same stencil.
pub fn divergence_unweighted(p: &SphereParams, s: &ReducedState) -> f64 {
    fd_divergence(s, |z| reduced_rhs(p, z))
}

fn fd_divergence(s: &ReducedState, field: impl Fn(&ReducedState) -> Vec6) -> f64 {
    let h = DIVERGENCE_STEP;
    let z = s.to_vec6();
    (0..6)
        .map(|l| {
            let mut zp = z;
            let mut zm = z;
            zp[l] += h;
            zm[l] -= h;
            (field(&ReducedState::from_vec6(&zp))[l] - field(&ReducedState::from_vec6(&zm))[l])
                / (2.0 * h)
        })
        .sum()
}

impl PhaseSpace for ReducedState {
    type Tangent = Vec6;

    fn shifted(&self, d: &Vec6, h: f64) -> Self {
        ReducedState::from_vec6(&(self.to_vec6() + d * h))
    }

    fn is_finite(&self) -> bool {
        ReducedState::is_finite(self)
    }

    fn repair(&mut self) -> Result<()> {
        self.gamma = self.gamma.normalize();
        Ok(())
    }

    fn reduced(&self, _p: &SphereParams) -> ReducedState {
        *self
    }
}

/// Attitude, contact position and contact-point momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState {
    pub g: Mat3,
    pub x: f64,
    pub y: f64,
    pub k: Vec3,
}

impl FullState {
    pub fn gamma(&self) -> Vec3 {
        poisson_vector(&self.g)
    }
}

/// Time derivative of a [`FullState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullRates {
    pub g_dot: Mat3,
    pub x_dot: f64,
    pub y_dot: f64,
    pub k_dot: Vec3,
}

impl Add for FullRates {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            g_dot: self.g_dot + o.g_dot,
            x_dot: self.x_dot + o.x_dot,
            y_dot: self.y_dot + o.y_dot,
            k_dot: self.k_dot + o.k_dot,
        }
    }
}

impl Mul<f64> for FullRates {
    type Output = Self;

    fn mul(self, h: f64) -> Self {
        Self {
            g_dot: self.g_dot * h,
            x_dot: self.x_dot * h,
            y_dot: self.y_dot * h,
            k_dot: self.k_dot * h,
        }
    }
}

impl PhaseSpace for FullState {
    type Tangent = FullRates;

    fn shifted(&self, d: &FullRates, h: f64) -> Self {
        Self {
            g: self.g + d.g_dot * h,
            x: self.x + d.x_dot * h,
            y: self.y + d.y_dot * h,
            k: self.k + d.k_dot * h,
        }
    }

    fn is_finite(&self) -> bool {
        self.g.iter().chain(self.k.iter()).all(|v| v.is_finite())
            && self.x.is_finite()
            && self.y.is_finite()
    }

    fn repair(&mut self) -> Result<()> {
        self.g = reorthonormalize(&self.g)?;
        Ok(())
    }

    fn reduced(&self, _p: &SphereParams) -> ReducedState {
        ReducedState::from_raw(self.k, self.gamma())
    }
}

/// Rolling without slipping: `ẋ = rω₂ˢ`, `ẏ = −rω₁ˢ`, `ġ = g·hat(ω)`, `K̇ = K × ω`.
pub fn full_rhs(p: &SphereParams, s: &FullState) -> FullRates {
    let reduced = ReducedState::from_raw(s.k, s.gamma());
    let w = DerivedKinematics::new(p, &reduced).omega_body;
    let ws = s.g * w;
    FullRates {
        g_dot: s.g * hat(&w),
        x_dot: p.radius() * ws.y,
        y_dot: -p.radius() * ws.x,
        k_dot: s.k.cross(&w),
    }
}
