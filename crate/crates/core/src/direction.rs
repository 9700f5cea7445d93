//! Affine-normal and Newton search directions.

use std::fmt;

use crate::error::{Result, YandError};
use crate::numerics::{
    build_normal_aligned_frame, classify_symmetric, inf_norm, invert, solve_nonsingular, solve_spd,
    Frame, RealMatrix, RealVector, SymmetricTag,
};
use crate::objective::Objective;

/// Default relative width of the band in which `⟨∇f, d⟩` counts as zero.
pub const EPS_ORTH: f64 = 1e-12;

/// The Hessian in the normal-aligned frame, split into tangent and normal parts.
#[derive(Debug, Clone)]
pub struct BlockHessian {
    /// Tangent-tangent block `[tᵢᵀ H tⱼ]`.
    pub b: RealMatrix,
    /// Mixed column `[n̂ᵀ H tᵢ]`.
    pub c: RealVector,
    pub d_nn: f64,
    pub frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointTag {
    Elliptic,
    Degenerate,
    NonElliptic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointClass {
    pub tag: PointTag,
    pub min_eig_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionCase {
    AN,
    FlippedAN,
    SteepestFallback,
}

impl DirectionCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            DirectionCase::AN => "AN",
            DirectionCase::FlippedAN => "FlippedAN",
            DirectionCase::SteepestFallback => "SteepestFallback",
        }
    }
}

impl fmt::Display for DirectionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sign-corrected descent direction with its frame decomposition.
#[derive(Debug, Clone)]
pub struct DirectionResult {
    pub d: RealVector,
    pub case: DirectionCase,
    /// Tangential coefficients in the frame used for the computation.
    pub tau: RealVector,
    /// `‖τ‖`.
    pub t: f64,
    /// Cosine of the angle between `d` and `−∇f`.
    pub cos_theta: f64,
    pub point_class: PointClass,
}

/// Rotates `∇²f(x)` into `frame` and partitions it with the normal axis last.
pub fn block_in_frame(obj: &dyn Objective, x: &RealVector, frame: &Frame) -> BlockHessian {
    let h = obj.hessian(x);
    let t = frame.tangents();
    let n_hat = frame.normal();
    let ht = &h * &t;
    let b = t.tr_mul(&ht);
    let b = (&b + b.transpose()) * 0.5;
    let c = ht.tr_mul(&n_hat);
    let d_nn = n_hat.dot(&(&h * &n_hat));
    BlockHessian {
        b,
        c,
        d_nn,
        frame: frame.clone(),
    }
}

/// Builds the normal-aligned frame at `x` and the block Hessian in it.
pub fn block_decompose(obj: &dyn Objective, x: &RealVector) -> Result<BlockHessian> {
    let frame = build_normal_aligned_frame(&obj.gradient(x))?;
    Ok(block_in_frame(obj, x, &frame))
}

fn classify_block(block: &BlockHessian) -> PointClass {
    match classify_symmetric(&block.b) {
        Ok(class) => PointClass {
            tag: match class.tag {
                SymmetricTag::PositiveDefinite => PointTag::Elliptic,
                SymmetricTag::Singular => PointTag::Degenerate,
                SymmetricTag::OtherIndefinite => PointTag::NonElliptic,
            },
            min_eig_b: class.min_eig,
        },
        Err(_) => PointClass {
            tag: PointTag::Degenerate,
            min_eig_b: f64::NAN,
        },
    }
}

/// Elliptic / Degenerate / NonElliptic classification of the level set through `x`.
pub fn classify_point(obj: &dyn Objective, x: &RealVector) -> Result<PointClass> {
    Ok(classify_block(&block_decompose(obj, x)?))
}

fn affine_normal_from_block(
    obj: &dyn Objective,
    x: &RealVector,
    block: &BlockHessian,
    class: &PointClass,
) -> Result<(RealVector, RealVector)> {
    if class.tag == PointTag::Degenerate {
        return Err(YandError::DegenerateTangentBlock {
            min_eig: class.min_eig_b,
        });
    }
    let frame = &block.frame;
    let n = frame.tangent_dim();
    let b_inv = invert(&block.b).ok_or(YandError::DegenerateTangentBlock {
        min_eig: class.min_eig_b,
    })?;
    let t = frame.tangents();
    // w_p = Σ_q (B⁻¹)_pq t_q, so Σ_pq (B⁻¹)_pq D³[t_p, t_q, t_i] = Σ_p D³[t_p, w_p, t_i]
    let w = &t * &b_inv;
    let s = RealVector::from_fn(n, |i, _| {
        let ti = t.column(i).into_owned();
        (0..n)
            .map(|p| {
                obj.third_directional(x, &t.column(p).into_owned(), &w.column(p).into_owned(), &ti)
            })
            .sum()
    });
    let rhs = &block.c - s * (frame.grad_norm() / (n as f64 + 2.0));
    let tau = &b_inv * rhs;
    let d = &t * &tau - frame.normal();
    Ok((tau, d))
}

/// The affine-normal direction `d = Σ τᵢ tᵢ − n̂`, scaled so its normal component is `−1`.
pub fn affine_normal_direction(
    obj: &dyn Objective,
    x: &RealVector,
) -> Result<(RealVector, RealVector)> {
    let block = block_decompose(obj, x)?;
    let class = classify_block(&block);
    affine_normal_from_block(obj, x, &block, &class)
}

/// Same as [`affine_normal_direction`] with a caller-chosen frame.
pub fn affine_normal_in_frame(
    obj: &dyn Objective,
    x: &RealVector,
    frame: &Frame,
) -> Result<(RealVector, RealVector)> {
    let block = block_in_frame(obj, x, frame);
    let class = classify_block(&block);
    affine_normal_from_block(obj, x, &block, &class)
}

/// Planar closed form `τ = f₂₁/f₁₁ − (‖∇f‖/3)·f₁₁₁/f₁₁²` in the default frame.
pub fn planar_tau(obj: &dyn Objective, x: &RealVector) -> Result<f64> {
    if obj.dim() != 2 {
        return Err(YandError::UnsupportedDimension { dim: obj.dim() });
    }
    let block = block_decompose(obj, x)?;
    let f11 = block.b[(0, 0)];
    if classify_block(&block).tag == PointTag::Degenerate {
        return Err(YandError::DegenerateTangentBlock { min_eig: f11 });
    }
    let t = block.frame.tangent(0);
    let f111 = obj.third_directional(x, &t, &t, &t);
    Ok(block.c[0] / f11 - block.frame.grad_norm() / 3.0 * f111 / (f11 * f11))
}

fn steepest_fallback(frame: &Frame, class: PointClass) -> DirectionResult {
    DirectionResult {
        d: -frame.normal(),
        case: DirectionCase::SteepestFallback,
        tau: RealVector::zeros(frame.tangent_dim()),
        t: 0.0,
        cos_theta: 1.0,
        point_class: class,
    }
}

/// The sign-corrected YAND direction at `x`.
pub fn descent_direction(
    obj: &dyn Objective,
    x: &RealVector,
    eps_orth: f64,
) -> Result<DirectionResult> {
    let frame = build_normal_aligned_frame(&obj.gradient(x))?;
    Ok(descent_direction_in_frame(obj, x, &frame, eps_orth))
}

/// Same as [`descent_direction`] with a caller-chosen frame.
///
/// The raw affine normal is oriented along the inward normal at elliptic
/// points and against it elsewhere, so it is an ascent direction exactly at
/// non-elliptic points; that case is reported as `FlippedAN`.
pub fn descent_direction_in_frame(
    obj: &dyn Objective,
    x: &RealVector,
    frame: &Frame,
    eps_orth: f64,
) -> DirectionResult {
    let block = block_in_frame(obj, x, frame);
    let class = classify_block(&block);
    let Ok((tau, d)) = affine_normal_from_block(obj, x, &block, &class) else {
        return steepest_fallback(frame, class);
    };
    if d.iter().any(|v| !v.is_finite()) {
        return steepest_fallback(frame, class);
    }
    let g = frame.normal() * frame.grad_norm();
    let orientation = if class.tag == PointTag::Elliptic {
        1.0
    } else {
        -1.0
    };
    let g_norm = frame.grad_norm();
    let d_norm = d.norm();
    let raw_slope = orientation * g.dot(&d);
    let band = eps_orth * g_norm * d_norm;
    let case = if raw_slope < -band {
        DirectionCase::AN
    } else if raw_slope > band {
        DirectionCase::FlippedAN
    } else {
        return steepest_fallback(frame, class);
    };
    let cos_theta = -g.dot(&d) / (g_norm * d_norm);
    DirectionResult {
        t: tau.norm(),
        d,
        case,
        tau,
        cos_theta,
        point_class: class,
    }
}

/// Solves `∇²f(x)·d = −∇f(x)`, optionally shifting an indefinite Hessian to positive definite.
pub fn newton_direction(
    obj: &dyn Objective,
    x: &RealVector,
    regularize: bool,
) -> Result<RealVector> {
    let g = obj.gradient(x);
    let h = obj.hessian(x);
    let class = classify_symmetric(&h)?;
    let rhs = -g;
    match class.tag {
        SymmetricTag::PositiveDefinite => solve_spd(&class, &rhs),
        _ if regularize => {
            let n = h.nrows();
            let lambda = (-class.min_eig).max(0.0) + 1e-8 * inf_norm(&class.matrix).max(1.0);
            let shifted = &class.matrix + RealMatrix::identity(n, n) * lambda;
            let shifted = classify_symmetric(&shifted)?;
            solve_spd(&shifted, &rhs)
        }
        SymmetricTag::Singular => Err(YandError::SingularHessian {
            min_eig: class.min_eig,
        }),
        SymmetricTag::OtherIndefinite => {
            solve_nonsingular(&class.matrix, &rhs).ok_or(YandError::SingularHessian {
                min_eig: class.min_eig,
            })
        }
    }
}
