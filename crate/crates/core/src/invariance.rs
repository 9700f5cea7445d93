//! Affine-scaling experiments: YAND on `φ(Bx)` against YAND on `φ`.

use std::sync::Arc;

use crate::direction::{descent_direction, DirectionCase, EPS_ORTH};
use crate::error::{Result, YandError};
use crate::line_search::LineSearchSpec;
use crate::numerics::{angle_between, invert, RealMatrix, RealVector};
use crate::objective::Objective;
use crate::optimizer::{yand_run, RunReport, StepTag, StoppingSpec};
use crate::problems::{LinearlyTransformed, Problem};

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    /// Condition number of `B`.
    pub gamma: f64,
    /// `‖B x_k − y_k‖` for the aligned iterates.
    pub per_iterate_deviation: Vec<f64>,
    pub max_deviation: f64,
    pub iters_scaled: usize,
    pub iters_base: usize,
    /// Steps in either run that did not use the affine normal as is.
    pub non_an_steps: usize,
    pub scaled: RunReport,
    pub base: RunReport,
}

fn check_map(b: &RealMatrix) -> Result<RealMatrix> {
    if b.nrows() != b.ncols() {
        return Err(YandError::SingularScaling);
    }
    let det = b.determinant();
    if !(det > 0.0 && det.is_finite()) {
        return Err(YandError::SingularScaling);
    }
    invert(b).ok_or(YandError::SingularScaling)
}

fn condition_number(b: &RealMatrix) -> f64 {
    let sv = b.clone().svd(false, false).singular_values;
    sv.max() / sv.min()
}

/// The problem `f(x) = φ(Bx)` started at `B⁻¹ y₀`.
pub fn scaled_problem(base: &Problem, b: &RealMatrix) -> Result<Problem> {
    let b_inv = check_map(b)?;
    if b.nrows() != base.dim() {
        return Err(YandError::DimensionMismatch {
            expected: base.dim(),
            actual: b.nrows(),
        });
    }
    let objective: Arc<dyn Objective> = Arc::new(LinearlyTransformed {
        inner: base.objective.clone(),
        map: b.clone(),
    });
    let x0 = &b_inv * &base.x0;
    let mut p = Problem::new(
        &format!("{}∘B", base.name),
        objective,
        x0.as_slice(),
        "linearly transformed",
    );
    p.x_star = base.x_star.as_ref().map(|y| &b_inv * y);
    p.f_star = base.f_star;
    Ok(p)
}

/// Runs YAND on `φ(Bx)` and on `φ` and compares `B x_k` with `y_k`.
pub fn run_invariance(
    base: &Problem,
    b: &RealMatrix,
    ls: &LineSearchSpec,
    stop: &StoppingSpec,
) -> Result<InvarianceReport> {
    let scaled = scaled_problem(base, b)?;
    let run_scaled = yand_run(&scaled, ls, stop);
    let run_base = yand_run(base, ls, stop);
    let per_iterate_deviation: Vec<f64> = run_scaled
        .records
        .iter()
        .zip(&run_base.records)
        .map(|(xs, ys)| (b * &xs.x - &ys.x).norm())
        .collect();
    let max_deviation = per_iterate_deviation.iter().copied().fold(0.0, f64::max);
    let non_an_steps = run_scaled
        .records
        .iter()
        .chain(&run_base.records)
        .filter(|r| matches!(r.case, Some(tag) if tag != StepTag::Direction(DirectionCase::AN)))
        .count();
    Ok(InvarianceReport {
        gamma: condition_number(b),
        per_iterate_deviation,
        max_deviation,
        iters_scaled: run_scaled.iters,
        iters_base: run_base.iters,
        non_an_steps,
        scaled: run_scaled,
        base: run_base,
    })
}

/// Angle between `B·d_f(x)` and `d_φ(Bx)` for `f = φ∘B`.
pub fn direction_covariance_angle(
    phi: Arc<dyn Objective>,
    b: &RealMatrix,
    x: &RealVector,
) -> Result<f64> {
    check_map(b)?;
    let f = LinearlyTransformed {
        inner: phi.clone(),
        map: b.clone(),
    };
    let d_f = descent_direction(&f, x, EPS_ORTH)?.d;
    let d_phi = descent_direction(&*phi, &(b * x), EPS_ORTH)?.d;
    Ok(angle_between(&(b * d_f), &d_phi))
}
