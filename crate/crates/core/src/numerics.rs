//! Dense small-matrix kernel: normal-aligned frames, symmetric classification
//! and linear solves.
//!
//! Problem sizes here are tiny (the ambient dimension rarely exceeds a handful),
//! so everything is dense and O(n³).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Result, YandError};

pub type RealVector = DVector<f64>;
pub type RealMatrix = DMatrix<f64>;

/// Relative threshold on the smallest eigenvalue separating definite from singular.
pub const DEGENERACY_EPS: f64 = 1e-10;
/// Relative tolerance on `|M_ij - M_ji|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Gradients at or below this norm have no usable normal direction.
pub const ZERO_GRADIENT_NORM: f64 = 1e-300;

/// Maximum absolute row sum.
pub fn inf_norm(m: &RealMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Angle in radians between two nonzero vectors, in `[0, π]`.
pub fn angle_between(a: &RealVector, b: &RealVector) -> f64 {
    let cos = a.dot(b) / (a.norm() * b.norm());
    // acos loses all precision near 0; atan2 of |a×b| style quantities does not
    let sin = (a * b.norm() - b * a.norm()).norm();
    let cosv = (a * b.norm() + b * a.norm()).norm();
    if cos.is_nan() {
        return f64::NAN;
    }
    2.0 * sin.atan2(cosv)
}

/// Orthonormal basis whose last column is the unit gradient.
///
/// Columns `0..n` span the tangent hyperplane of the level set; column `n` is
/// `n̂ = ∇f/‖∇f‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    q: RealMatrix,
    grad_norm: f64,
}

impl Frame {
    pub fn q(&self) -> &RealMatrix {
        &self.q
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_norm
    }

    /// Ambient dimension `n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.q.ncols()
    }

    /// Number of tangent directions `n`.
    pub fn tangent_dim(&self) -> usize {
        self.q.ncols() - 1
    }

    pub fn normal(&self) -> RealVector {
        self.q.column(self.tangent_dim()).into_owned()
    }

    pub fn tangent(&self, i: usize) -> RealVector {
        assert!(i < self.tangent_dim(), "tangent index out of range");
        self.q.column(i).into_owned()
    }

    /// The `(n+1) × n` block of tangent columns.
    pub fn tangents(&self) -> RealMatrix {
        self.q.columns(0, self.tangent_dim()).into_owned()
    }

    /// Maps frame coordinates `(τ_1, …, τ_n, ν)` to the ambient vector `Σ τ_i t_i + ν n̂`.
    pub fn to_ambient(&self, coords: &RealVector) -> RealVector {
        &self.q * coords
    }

    /// Maps an ambient vector to frame coordinates.
    pub fn to_frame(&self, v: &RealVector) -> RealVector {
        self.q.tr_mul(v)
    }

    /// Replaces the tangent columns `T` by `T·R` for an orthogonal `n × n` matrix `R`.
    ///
    /// The normal column is untouched, so the result is again a valid frame.
    pub fn rotate_tangents(&self, r: &RealMatrix) -> Result<Frame> {
        let n = self.tangent_dim();
        if r.nrows() != n || r.ncols() != n {
            return Err(YandError::DimensionMismatch {
                expected: n,
                actual: r.nrows(),
            });
        }
        let rotated = self.tangents() * r;
        let mut q = self.q.clone();
        q.columns_mut(0, n).copy_from(&rotated);
        Ok(Frame {
            q,
            grad_norm: self.grad_norm,
        })
    }
}

/// Builds the normal-aligned frame for gradient `g` with a single Householder
/// reflection.
///
/// The reflector vector is `w = u + sign(u_last)·e_last` with `u = g/‖g‖`, so
/// `w_last` never suffers cancellation. When `u_last ≥ 0` the reflection maps
/// `e_last` to `-u` and the last column is negated afterwards.
pub fn build_normal_aligned_frame(g: &RealVector) -> Result<Frame> {
    let dim = g.len();
    if dim < 2 {
        return Err(YandError::DimensionMismatch {
            expected: 2,
            actual: dim,
        });
    }
    let norm = g.norm();
    if !norm.is_finite() || norm <= ZERO_GRADIENT_NORM || g.iter().any(|v| !v.is_finite()) {
        return Err(YandError::ZeroGradient { norm });
    }
    let u = g / norm;
    let last = dim - 1;
    let flip = u[last] >= 0.0;
    let mut w = u.clone();
    w[last] += if flip { 1.0 } else { -1.0 };
    // wᵀw = 2(1 + |u_last|)
    let half_ww = 1.0 + u[last].abs();
    let mut q = RealMatrix::identity(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            q[(i, j)] -= w[i] * w[j] / half_ww;
        }
    }
    if flip {
        q.column_mut(last).neg_mut();
    }
    Ok(Frame { q, grad_norm: norm })
}

/// Definiteness tag of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetricTag {
    PositiveDefinite,
    Singular,
    OtherIndefinite,
}

/// Result of [`classify_symmetric`]; carries a Cholesky factor when positive definite.
#[derive(Debug, Clone)]
pub struct SymmetricClass {
    pub tag: SymmetricTag,
    pub min_eig: f64,
    /// The symmetrized matrix that was classified.
    pub matrix: RealMatrix,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl SymmetricClass {
    pub fn factor(&self) -> Option<&Cholesky<f64, Dyn>> {
        self.factor.as_ref()
    }

    pub fn threshold(&self) -> f64 {
        DEGENERACY_EPS * inf_norm(&self.matrix).max(1.0)
    }
}

/// Checks symmetry, symmetrizes, and classifies by the smallest eigenvalue.
pub fn classify_symmetric(m: &RealMatrix) -> Result<SymmetricClass> {
    if m.nrows() != m.ncols() {
        return Err(YandError::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    let scale = inf_norm(m).max(1.0);
    let tolerance = SYMMETRY_TOL * scale;
    let asymmetry = (m - m.transpose()).amax();
    if !(asymmetry <= tolerance) {
        return Err(YandError::NotSymmetric {
            asymmetry,
            tolerance,
        });
    }
    let sym = (m + m.transpose()) * 0.5;
    let min_eig = SymmetricEigen::new(sym.clone()).eigenvalues.min();
    let threshold = DEGENERACY_EPS * scale;
    let tag = if min_eig > threshold {
        SymmetricTag::PositiveDefinite
    } else if min_eig.abs() <= threshold {
        SymmetricTag::Singular
    } else {
        SymmetricTag::OtherIndefinite
    };
    let factor = match tag {
        SymmetricTag::PositiveDefinite => Cholesky::new(sym.clone()),
        _ => None,
    };
    Ok(SymmetricClass {
        tag,
        min_eig,
        matrix: sym,
        factor,
    })
}

/// Solves `M v = rhs` using the Cholesky factor of a positive definite classification.
pub fn solve_spd(class: &SymmetricClass, rhs: &RealVector) -> Result<RealVector> {
    let factor = class.factor().ok_or(YandError::NotFactorized)?;
    if rhs.len() != class.matrix.nrows() {
        return Err(YandError::DimensionMismatch {
            expected: class.matrix.nrows(),
            actual: rhs.len(),
        });
    }
    Ok(factor.solve(rhs))
}

/// Solves `M v = rhs` for a nonsingular (possibly indefinite) square matrix via LU.
pub fn solve_nonsingular(m: &RealMatrix, rhs: &RealVector) -> Option<RealVector> {
    m.clone().lu().solve(rhs)
}

/// Inverse of a nonsingular square matrix.
pub fn invert(m: &RealMatrix) -> Option<RealMatrix> {
    m.clone().lu().try_inverse()
}
