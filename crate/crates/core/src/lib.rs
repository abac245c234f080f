//! Numerical model of the Chaplygin rolling sphere.
//!
//! The crate covers the reduced system on `(K, γ)` coordinates, where `K` is the
//! angular momentum about the contact point in the body frame and `γ` is the
//! vertical unit vector seen from the body. Three almost-Poisson structures are
//! provided for it ([`brackets::BracketVariant`]): the standard nonholonomic
//! bracket, the affine bracket, and the affine bracket multiplied by the
//! conformal factor `μ(γ) = √Y(γ)`. The last one is a genuine Poisson bracket.
//!
//! [`verify`] turns the structural properties of these brackets and of the flow
//! into batch numerical checks.

pub mod brackets;
pub mod dynamics;
mod error;
pub mod model;
pub mod so3;
pub mod verify;

pub use error::{Error, Result};
pub use model::{DerivedKinematics, FirstIntegrals, ReducedState, SphereParams};
pub use so3::{Mat3, Vec3};

/// Coordinates `z = (K1, K2, K3, γ1, γ2, γ3)` on the ambient space of the reduced system.
pub type Vec6 = nalgebra::SVector<f64, 6>;
/// 6×6 coefficient matrix indexed like [`Vec6`].
pub type Mat6 = nalgebra::SMatrix<f64, 6, 6>;
