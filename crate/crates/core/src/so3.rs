//! Rotation-group utilities.
//!
//! Attitudes `g ∈ SO(3)` map body coordinates to space coordinates, so the
//! coefficient `g[(i, j)]` is row `i`, column `j` and the vertical direction seen
//! from the body is the third *row* of `g`.

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Largest Frobenius distance from SO(3) accepted by [`reorthonormalize`].
pub const MAX_REPAIR_DISTANCE: f64 = 0.1;

/// Below this rotation angle the Rodrigues coefficients are evaluated by series.
const SMALL_ANGLE: f64 = 1e-8;

/// Skew-symmetric matrix with `hat(v) * w == v.cross(&w)`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// Inverse of [`hat`] on skew-symmetric matrices. Only the lower triangle is read.
pub fn unhat(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Structure constants of `so(3)`: `[e_i, e_j] = c_ijk e_k`, zero-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> Result<i8> {
    for idx in [i, j, k] {
        if idx > 2 {
            return Err(Error::IndexOutOfRange { index: idx, dim: 3 });
        }
    }
    Ok(epsilon(i, j, k))
}

/// Unchecked Levi-Civita symbol for indices already known to be in `0..3`.
#[inline]
pub(crate) fn epsilon(i: usize, j: usize, k: usize) -> i8 {
    if i == j || j == k || k == i {
        0
    } else if (j + 3 - i) % 3 == 1 && (k + 3 - j) % 3 == 1 {
        1
    } else {
        -1
    }
}

/// Matrix exponential of `hat(v)` (Rodrigues' formula).
pub fn exp_rotation(v: &Vec3) -> Mat3 {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(v);
    Mat3::identity() + k * a + k * k * b
}

/// Closest rotation to `g` in Frobenius norm (orthogonal polar factor).
///
/// Computed with the Newton iteration `X ← (X + X⁻ᵀ) / 2`, which converges
/// quadratically for matrices close to SO(3).
pub fn reorthonormalize(g: &Mat3) -> Result<Mat3> {
    let not_near = |distance: f64| Error::NotNearRotation {
        distance,
        limit: MAX_REPAIR_DISTANCE,
    };
    if !g.iter().all(|x| x.is_finite()) || g.determinant() <= 0.0 {
        return Err(not_near(f64::INFINITY));
    }

    let mut x = *g;
    for _ in 0..60 {
        let inv_t = x
            .try_inverse()
            .ok_or_else(|| not_near(f64::INFINITY))?
            .transpose();
        let next = (x + inv_t) * 0.5;
        let step = (next - x).norm();
        x = next;
        if step < 1e-15 {
            break;
        }
    }

    let distance = (g - x).norm();
    if distance > MAX_REPAIR_DISTANCE {
        return Err(not_near(distance));
    }
    Ok(x)
}

/// The Poisson vector `γ_i = g_3i`: the space vertical `e₃` in body coordinates.
pub fn poisson_vector(g: &Mat3) -> Vec3 {
    g.row(2).transpose()
}

/// Frobenius distance between `gᵀg` and the identity.
pub fn orthonormality_defect(g: &Mat3) -> f64 {
    (g.transpose() * g - Mat3::identity()).norm()
}

/// A rotation whose third row is the unit vector `gamma`.
///
/// Uses the shortest rotation that carries `gamma` to `e₃`; the remaining
/// freedom (a twist about `e₃`) does not affect the reduced state.
pub fn rotation_with_poisson_vector(gamma: &Vec3) -> Mat3 {
    let e3 = Vec3::z();
    let u = gamma.normalize();
    let axis = u.cross(&e3);
    let s = axis.norm();
    let c = u.dot(&e3);
    if s < 1e-15 {
        if c > 0.0 {
            return Mat3::identity();
        }
        return exp_rotation(&Vec3::new(std::f64::consts::PI, 0.0, 0.0));
    }
    exp_rotation(&(axis / s * s.atan2(c)))
}
