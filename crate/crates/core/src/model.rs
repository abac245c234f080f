//! Physical parameters of the sphere and the kinematic dictionary between the
//! body angular velocity `ω` and the contact-point angular momentum `K`.
//!
//! With `A = 𝕀 + mr²E` and `a = A⁻¹γ`:
//!
//! ```text
//! K  = 𝕀ω + mr²(ω − (ω·γ)γ)
//! Y  = 1 − mr² γ·a
//! ω₃ = ω·γ = K·a / Y
//! ω  = A⁻¹K + mr² ω₃ a = T(γ) K,    T(γ) = A⁻¹ + (mr²/Y) a aᵀ
//! ```
//!
//! None of these formulas assume `|γ| = 1`; they are evaluated on the whole
//! ambient space so that finite differences and drifted states stay meaningful.

use crate::so3::{Mat3, Vec3};
use crate::{Error, Result, Vec6};

/// Tolerance on `|γ| − 1` for states that claim to live on the sphere.
pub const UNIT_TOLERANCE: f64 = 1e-10;

/// Mass, radius and principal moments of inertia, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereParams {
    mass: f64,
    radius: f64,
    inertia: Vec3,
}

impl SphereParams {
    pub fn new(mass: f64, radius: f64, inertia: Vec3) -> Result<Self> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and positive, got {v}"),
                })
            }
        };
        positive("mass", mass)?;
        positive("radius", radius)?;
        positive("I1", inertia.x)?;
        positive("I2", inertia.y)?;
        positive("I3", inertia.z)?;
        Ok(Self {
            mass,
            radius,
            inertia,
        })
    }

    /// m = 1, r = 1, 𝕀 = diag(1, 2, 3).
    pub fn canonical() -> Self {
        Self {
            mass: 1.0,
            radius: 1.0,
            inertia: Vec3::new(1.0, 2.0, 3.0),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn inertia(&self) -> Vec3 {
        self.inertia
    }

    /// `mr²`, the coupling introduced by the rolling constraint.
    pub fn mr2(&self) -> f64 {
        self.mass * self.radius * self.radius
    }

    fn a_inv_diag(&self) -> Vec3 {
        let mr2 = self.mr2();
        self.inertia.map(|i| 1.0 / (i + mr2))
    }

    /// `A⁻¹ = (𝕀 + mr²E)⁻¹`, diagonal.
    pub fn a_inverse(&self) -> Mat3 {
        Mat3::from_diagonal(&self.a_inv_diag())
    }

    fn y_raw(&self, gamma: &Vec3) -> f64 {
        1.0 - self.mr2() * gamma.dot(&self.a_inv_diag().component_mul(gamma))
    }

    /// `Y(γ) = 1 − mr² γ·A⁻¹γ`. Rejects `γ` off the unit sphere.
    pub fn y_gamma(&self, gamma: &Vec3) -> Result<f64> {
        let norm = gamma.norm();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitGamma { norm });
        }
        Ok(self.y_raw(gamma))
    }

    /// Conformal factor `μ(γ) = √Y(γ)`.
    pub fn mu(&self, gamma: &Vec3) -> f64 {
        self.y_raw(gamma).sqrt()
    }

    /// `T(γ)` with `ω = T(γ) K`; symmetric positive definite on the sphere.
    pub fn t_matrix(&self, gamma: &Vec3) -> Mat3 {
        let a = self.a_inv_diag().component_mul(gamma);
        self.a_inverse() + a * a.transpose() * (self.mr2() / self.y_raw(gamma))
    }

    pub fn omega_body(&self, s: &ReducedState) -> Vec3 {
        DerivedKinematics::new(self, s).omega_body
    }

    /// `ω₃ˢ = ω·γ`, the vertical spin rate.
    pub fn omega3_space(&self, s: &ReducedState) -> f64 {
        let a = self.a_inv_diag().component_mul(&s.gamma);
        s.k.dot(&a) / self.y_raw(&s.gamma)
    }

    /// Inverse of [`Self::omega_body`] at fixed `γ`.
    pub fn k_from_omega(&self, gamma: &Vec3, omega: &Vec3) -> Vec3 {
        self.inertia.component_mul(omega) + (omega - gamma * omega.dot(gamma)) * self.mr2()
    }

    /// Reduced energy `½ K·ω`.
    pub fn hamiltonian(&self, s: &ReducedState) -> f64 {
        0.5 * s.k.dot(&self.omega_body(s))
    }

    /// `(∂H/∂K, ∂H/∂γ) = (ω, mr² ω₃ (ω − ω₃γ))`.
    ///
    /// The `γ` part is the ambient formula; along the sphere only its tangential
    /// component is meaningful.
    pub fn grad_hamiltonian(&self, s: &ReducedState) -> (Vec3, Vec3) {
        let d = DerivedKinematics::new(self, s);
        let dgamma = (d.omega_body - s.gamma * d.omega3_space) * (self.mr2() * d.omega3_space);
        (d.omega_body, dgamma)
    }

    pub fn first_integrals(&self, s: &ReducedState) -> FirstIntegrals {
        FirstIntegrals {
            energy: self.hamiltonian(s),
            j: 0.5 * s.k.norm_squared(),
            k_gamma: s.k.dot(&s.gamma),
            gamma_norm2: s.gamma.norm_squared(),
        }
    }

    /// First derivatives of `ω`, `ω₃ˢ` and `μ` with respect to `(K, γ)`.
    pub fn kinematic_partials(&self, s: &ReducedState) -> KinematicPartials {
        let mr2 = self.mr2();
        let ainv = self.a_inv_diag();
        let a = ainv.component_mul(&s.gamma);
        let ainv_k = ainv.component_mul(&s.k);
        let y = self.y_raw(&s.gamma);
        let omega3 = s.k.dot(&a) / y;

        let domega3_dk = a / y;
        let domega3_dgamma = (ainv_k + a * (2.0 * mr2 * omega3)) / y;
        let domega_dk = self.a_inverse() + a * a.transpose() * (mr2 / y);
        let domega_dgamma =
            (a * domega3_dgamma.transpose() + Mat3::from_diagonal(&ainv) * omega3) * mr2;
        let mu = y.sqrt();
        let dmu_dgamma = a * (-mr2 / mu);

        KinematicPartials {
            domega_dk,
            domega_dgamma,
            domega3_dk,
            domega3_dgamma,
            dmu_dgamma,
        }
    }
}

/// Point `(K, γ)` of the reduced space, embedded in ℝ⁶.
///
/// `γ` is never renormalized behind the caller's back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub k: Vec3,
    pub gamma: Vec3,
}

impl ReducedState {
    /// Checked constructor: `|γ|` must be 1 within [`UNIT_TOLERANCE`].
    pub fn new(k: Vec3, gamma: Vec3) -> Result<Self> {
        let norm = gamma.norm();
        if !(norm - 1.0).abs().le(&UNIT_TOLERANCE) || !k.iter().all(|x| x.is_finite()) {
            return Err(Error::NonUnitGamma { norm });
        }
        Ok(Self { k, gamma })
    }

    /// Builds a state without checking `|γ|`, e.g. for finite-difference probes.
    pub fn from_raw(k: Vec3, gamma: Vec3) -> Self {
        Self { k, gamma }
    }

    pub fn from_vec6(z: &Vec6) -> Self {
        Self {
            k: z.fixed_rows::<3>(0).into_owned(),
            gamma: z.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vec6(&self) -> Vec6 {
        let mut z = Vec6::zeros();
        z.fixed_rows_mut::<3>(0).copy_from(&self.k);
        z.fixed_rows_mut::<3>(3).copy_from(&self.gamma);
        z
    }

    pub fn is_finite(&self) -> bool {
        self.k
            .iter()
            .chain(self.gamma.iter())
            .all(|x| x.is_finite())
    }
}

/// Per-state kinematic quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedKinematics {
    pub omega_body: Vec3,
    pub omega3_space: f64,
    pub y: f64,
    pub mu: f64,
    pub t: Mat3,
}

impl DerivedKinematics {
    pub fn new(p: &SphereParams, s: &ReducedState) -> Self {
        let mr2 = p.mr2();
        let ainv = p.a_inv_diag();
        let a = ainv.component_mul(&s.gamma);
        let y = p.y_raw(&s.gamma);
        let omega3_space = s.k.dot(&a) / y;
        let omega_body = ainv.component_mul(&s.k) + a * (mr2 * omega3_space);
        Self {
            omega_body,
            omega3_space,
            y,
            mu: y.sqrt(),
            t: Mat3::from_diagonal(&ainv) + a * a.transpose() * (mr2 / y),
        }
    }
}

/// Jacobians of the kinematic quantities. `domega_dgamma[(i, k)] = ∂ωᵢ/∂γₖ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicPartials {
    pub domega_dk: Mat3,
    pub domega_dgamma: Mat3,
    pub domega3_dk: Vec3,
    pub domega3_dgamma: Vec3,
    pub dmu_dgamma: Vec3,
}

/// Energy, `J = ½|K|²`, vertical momentum `K·γ` and `|γ|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstIntegrals {
    pub energy: f64,
    pub j: f64,
    pub k_gamma: f64,
    pub gamma_norm2: f64,
}

impl FirstIntegrals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.energy, self.j, self.k_gamma, self.gamma_norm2]
    }
}
