//! Almost-Poisson structures on the reduced space.
//!
//! A bracket is stored as its coefficient matrix `Λ(z)` with
//! `Λ_ij(z) = {z_i, z_j}(z)` in the coordinates `z = (K, γ)`. For any two
//! functions, `{F, G} = ∇F · Λ ∇G`, and the Hamiltonian vector field of `F` is
//! `X_F = Λ ∇F`, so that `ż_i = {z_i, H}`.
//!
//! The three built-in tables share the blocks
//!
//! ```text
//! {K_i, γ_j} = −c_ijl γ_l,        {γ_i, γ_j} = 0
//! ```
//!
//! and differ in the momentum block `{K_i, K_j} = −c_ijl P_l`:
//!
//! | variant  | `P`                          |
//! |----------|------------------------------|
//! | standard | `K + mr²(ω − ω₃ˢγ)`          |
//! | affine   | `K − mr²ω₃ˢγ`                |
//! | scaled   | affine table multiplied by `μ(γ)` |

use std::fmt;
use std::str::FromStr;

use crate::model::{DerivedKinematics, ReducedState, SphereParams};
use crate::so3::{epsilon, Mat3, Vec3};
use crate::{Error, Mat6, Result, Vec6};

/// Number of reduced coordinates `(K1, K2, K3, γ1, γ2, γ3)`.
pub const DIM: usize = 6;

/// Row and column labels used when printing tables.
pub const COORDINATE_LABELS: [&str; DIM] = ["K1", "K2", "K3", "g1", "g2", "g3"];

/// A state-dependent antisymmetric coefficient matrix and its partials.
pub trait BracketTable: Sync {
    /// `Λ(z)`.
    fn coefficients(&self, s: &ReducedState) -> Mat6;

    /// `[∂Λ/∂z_0, …, ∂Λ/∂z_5]`.
    fn coefficient_partials(&self, s: &ReducedState) -> [Mat6; DIM];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BracketVariant {
    Standard,
    Affine,
    Scaled,
}

impl BracketVariant {
    pub const ALL: [BracketVariant; 3] = [Self::Standard, Self::Affine, Self::Scaled];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Affine => "affine",
            Self::Scaled => "scaled",
        }
    }
}

impl fmt::Display for BracketVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BracketVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Self::Standard),
            "affine" => Ok(Self::Affine),
            "scaled" => Ok(Self::Scaled),
            other => Err(Error::InvalidParameter {
                name: "variant",
                reason: format!("unknown bracket variant `{other}`"),
            }),
        }
    }
}

/// One of the three built-in reduced brackets for a given sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedBracket {
    pub params: SphereParams,
    pub variant: BracketVariant,
}

impl ReducedBracket {
    pub fn new(params: SphereParams, variant: BracketVariant) -> Self {
        Self { params, variant }
    }

    /// Vector `P` of the momentum block and its Jacobians `(∂P/∂K, ∂P/∂γ)`.
    fn momentum_block(&self, s: &ReducedState) -> (Vec3, Mat3, Mat3) {
        let p = &self.params;
        let mr2 = p.mr2();
        let d = DerivedKinematics::new(p, s);
        let kp = p.kinematic_partials(s);
        let w3 = d.omega3_space;
        let g = s.gamma;

        // common affine part: K − mr²ω₃γ
        let mut vec = s.k - g * (mr2 * w3);
        let mut dk = Mat3::identity() - g * kp.domega3_dk.transpose() * mr2;
        let mut dg = -(g * kp.domega3_dgamma.transpose() + Mat3::identity() * w3) * mr2;

        if self.variant == BracketVariant::Standard {
            vec += d.omega_body * mr2;
            dk += kp.domega_dk * mr2;
            dg += kp.domega_dgamma * mr2;
        }
        (vec, dk, dg)
    }
}

/// Antisymmetric 6×6 table with `{K_i,K_j} = −c_ijl P_l`, `{K_i,γ_j} = −c_ijl γ_l`.
fn assemble(p_vec: &Vec3, gamma: &Vec3) -> Mat6 {
    let mut m = Mat6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut kk = 0.0;
            let mut kg = 0.0;
            for l in 0..3 {
                let c = f64::from(epsilon(i, j, l));
                kk -= c * p_vec[l];
                kg -= c * gamma[l];
            }
            if i < j {
                m[(i, j)] = kk;
                m[(j, i)] = -kk;
            }
            m[(i, 3 + j)] = kg;
            m[(3 + j, i)] = -kg;
        }
    }
    m
}

impl BracketTable for ReducedBracket {
    fn coefficients(&self, s: &ReducedState) -> Mat6 {
        let (p_vec, _, _) = self.momentum_block(s);
        let table = assemble(&p_vec, &s.gamma);
        match self.variant {
            BracketVariant::Scaled => table * self.params.mu(&s.gamma),
            _ => table,
        }
    }

    fn coefficient_partials(&self, s: &ReducedState) -> [Mat6; DIM] {
        let (p_vec, dp_dk, dp_dg) = self.momentum_block(s);
        let mut out = [Mat6::zeros(); DIM];
        for (n, partial) in out.iter_mut().enumerate() {
            let (dp, dgamma) = if n < 3 {
                (dp_dk.column(n).into_owned(), Vec3::zeros())
            } else {
                let mut e = Vec3::zeros();
                e[n - 3] = 1.0;
                (dp_dg.column(n - 3).into_owned(), e)
            };
            *partial = assemble(&dp, &dgamma);
        }

        if self.variant == BracketVariant::Scaled {
            let mu = self.params.mu(&s.gamma);
            let dmu = self.params.kinematic_partials(s).dmu_dgamma;
            let table = assemble(&p_vec, &s.gamma);
            for (n, partial) in out.iter_mut().enumerate() {
                *partial *= mu;
                if n >= 3 {
                    *partial += table * dmu[n - 3];
                }
            }
        }
        out
    }
}

/// Bracket table assembled from caller-supplied closures.
pub struct CustomBracket<C, D> {
    coefficients: C,
    partials: D,
}

impl<C, D> CustomBracket<C, D>
where
    C: Fn(&ReducedState) -> Mat6 + Sync,
    D: Fn(&ReducedState) -> [Mat6; DIM] + Sync,
{
    pub fn new(coefficients: C, partials: D) -> Self {
        Self {
            coefficients,
            partials,
        }
    }
}

impl<C, D> BracketTable for CustomBracket<C, D>
where
    C: Fn(&ReducedState) -> Mat6 + Sync,
    D: Fn(&ReducedState) -> [Mat6; DIM] + Sync,
{
    fn coefficients(&self, s: &ReducedState) -> Mat6 {
        (self.coefficients)(s)
    }

    fn coefficient_partials(&self, s: &ReducedState) -> [Mat6; DIM] {
        (self.partials)(s)
    }
}

/// A function on the reduced space together with its ambient gradient.
pub trait ScalarField: Sync {
    fn value(&self, s: &ReducedState) -> f64;
    fn gradient(&self, s: &ReducedState) -> Vec6;
}

/// The reduced energy `H = ½ K·ω`.
#[derive(Debug, Clone, Copy)]
pub struct Energy(pub SphereParams);

impl ScalarField for Energy {
    fn value(&self, s: &ReducedState) -> f64 {
        self.0.hamiltonian(s)
    }

    fn gradient(&self, s: &ReducedState) -> Vec6 {
        let (dk, dg) = self.0.grad_hamiltonian(s);
        ReducedState::from_raw(dk, dg).to_vec6()
    }
}

/// `J = ½ K·K`.
#[derive(Debug, Clone, Copy)]
pub struct HalfMomentumSquared;

impl ScalarField for HalfMomentumSquared {
    fn value(&self, s: &ReducedState) -> f64 {
        0.5 * s.k.norm_squared()
    }

    fn gradient(&self, s: &ReducedState) -> Vec6 {
        ReducedState::from_raw(s.k, Vec3::zeros()).to_vec6()
    }
}

/// Vertical angular momentum `K·γ`.
#[derive(Debug, Clone, Copy)]
pub struct VerticalMomentum;

impl ScalarField for VerticalMomentum {
    fn value(&self, s: &ReducedState) -> f64 {
        s.k.dot(&s.gamma)
    }

    fn gradient(&self, s: &ReducedState) -> Vec6 {
        ReducedState::from_raw(s.gamma, s.k).to_vec6()
    }
}

/// `|γ|²`.
#[derive(Debug, Clone, Copy)]
pub struct GammaNormSquared;

impl ScalarField for GammaNormSquared {
    fn value(&self, s: &ReducedState) -> f64 {
        s.gamma.norm_squared()
    }

    fn gradient(&self, s: &ReducedState) -> Vec6 {
        ReducedState::from_raw(Vec3::zeros(), s.gamma * 2.0).to_vec6()
    }
}

/// The coordinate function `z_i`.
#[derive(Debug, Clone, Copy)]
pub struct Coordinate(pub usize);

impl ScalarField for Coordinate {
    fn value(&self, s: &ReducedState) -> f64 {
        s.to_vec6()[self.0]
    }

    fn gradient(&self, _s: &ReducedState) -> Vec6 {
        let mut g = Vec6::zeros();
        g[self.0] = 1.0;
        g
    }
}

/// Scalar field from a pair of closures.
pub struct FnField<V, G> {
    value: V,
    gradient: G,
}

impl<V, G> FnField<V, G>
where
    V: Fn(&ReducedState) -> f64 + Sync,
    G: Fn(&ReducedState) -> Vec6 + Sync,
{
    pub fn new(value: V, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<V, G> ScalarField for FnField<V, G>
where
    V: Fn(&ReducedState) -> f64 + Sync,
    G: Fn(&ReducedState) -> Vec6 + Sync,
{
    fn value(&self, s: &ReducedState) -> f64 {
        (self.value)(s)
    }

    fn gradient(&self, s: &ReducedState) -> Vec6 {
        (self.gradient)(s)
    }
}

/// `{F, G}(s) = ∇F · Λ ∇G`.
pub fn bracket_eval(
    table: &dyn BracketTable,
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    s: &ReducedState,
) -> f64 {
    f.gradient(s).dot(&(table.coefficients(s) * g.gradient(s)))
}

/// `X_F = Λ ∇F`, with component `i` equal to `{z_i, F}`.
pub fn ham_vector_field(table: &dyn BracketTable, f: &dyn ScalarField, s: &ReducedState) -> Vec6 {
    table.coefficients(s) * f.gradient(s)
}

/// Coefficients and partials of a table at one state, for repeated Jacobiator queries.
pub struct Jacobiator {
    lambda: Mat6,
    partials: [Mat6; DIM],
}

impl Jacobiator {
    pub fn new(table: &dyn BracketTable, s: &ReducedState) -> Self {
        Self {
            lambda: table.coefficients(s),
            partials: table.coefficient_partials(s),
        }
    }

    /// `Σ_l Λ_il ∂_l Λ_jk`.
    fn term(&self, i: usize, j: usize, k: usize) -> f64 {
        (0..DIM)
            .map(|l| self.lambda[(i, l)] * self.partials[l][(j, k)])
            .sum()
    }

    /// Cyclic sum `J_ijk`; indices must be below [`DIM`].
    pub fn component(&self, i: usize, j: usize, k: usize) -> f64 {
        self.term(i, j, k) + self.term(j, k, i) + self.term(k, i, j)
    }

    /// Largest `|J_ijk|` over the 20 triples `i < j < k`, with the triple.
    pub fn max_abs(&self) -> (f64, [usize; 3]) {
        let mut best = (0.0, [0, 1, 2]);
        for i in 0..DIM {
            for j in i + 1..DIM {
                for k in j + 1..DIM {
                    let v = self.component(i, j, k).abs();
                    if v > best.0 {
                        best = (v, [i, j, k]);
                    }
                }
            }
        }
        best
    }
}

/// Jacobi defect `J_ijk` of `table` at `s`, from analytic coefficient partials.
pub fn jacobiator(
    table: &dyn BracketTable,
    i: usize,
    j: usize,
    k: usize,
    s: &ReducedState,
) -> Result<f64> {
    for index in [i, j, k] {
        if index >= DIM {
            return Err(Error::IndexOutOfRange { index, dim: DIM });
        }
    }
    Ok(Jacobiator::new(table, s).component(i, j, k))
}
