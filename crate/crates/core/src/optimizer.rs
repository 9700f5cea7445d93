//! The YAND iteration plus gradient-descent and Newton baselines.

use std::fmt;

use crate::direction::{descent_direction, newton_direction, DirectionCase, EPS_ORTH};
use crate::error::{Result, YandError};
use crate::line_search::{
    armijo_backtrack, bb_initial_step, exact_search, strong_wolfe_search, BbVariant,
    LineSearchResult, LineSearchSpec, LineSearchStatus,
};
use crate::numerics::{classify_symmetric, RealVector, SymmetricTag};
use crate::objective::Objective;
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingSpec {
    pub tol_grad: f64,
    pub max_iter: usize,
}

impl Default for StoppingSpec {
    fn default() -> Self {
        StoppingSpec {
            tol_grad: 1e-4,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Yand,
    GradientDescent,
    Newton,
    DampedNewton,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Yand => "YAND",
            Method::GradientDescent => "GradientDescent",
            Method::Newton => "Newton",
            Method::DampedNewton => "DampedNewton",
        })
    }
}

/// How the step length is chosen once a direction is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Search(LineSearchSpec),
    Fixed(f64),
    Unit,
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Search(ls) => write!(f, "{ls}"),
            StepRule::Fixed(a) => write!(f, "fixed({a})"),
            StepRule::Unit => f.write_str("unit"),
        }
    }
}

/// Length normalization applied to the YAND direction before the line search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionScaling {
    /// Use `d` as returned, normal component `−1`.
    Unit,
    /// Rescale by `−⟨∇f, d⟩ / dᵀ∇²f d` when that is positive.
    #[default]
    Curvature,
}

/// Largest curvature rescaling factor.
pub const MAX_CURVATURE_SCALE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YandOptions {
    pub eps_orth: f64,
    pub scaling: DirectionScaling,
    pub bb_variant: BbVariant,
}

impl Default for YandOptions {
    fn default() -> Self {
        YandOptions {
            eps_orth: EPS_ORTH,
            scaling: DirectionScaling::Curvature,
            bb_variant: BbVariant::BB1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepTag {
    Direction(DirectionCase),
    Newton,
}

impl StepTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepTag::Direction(c) => c.as_str(),
            StepTag::Newton => "Newton",
        }
    }
}

impl fmt::Display for StepTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Details of the step that produced an iterate.
#[derive(Debug, Clone)]
pub struct StepInfo {
    /// The direction actually stepped along (after any rescaling).
    pub direction: RealVector,
    /// `⟨∇f(x_{k-1}), direction⟩`.
    pub slope: f64,
    pub scale: f64,
    pub f_prev: f64,
    pub line_search: Option<LineSearchResult>,
}

#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub k: usize,
    pub x: RealVector,
    pub f: f64,
    pub grad_norm: f64,
    /// Step length, `0` for the start point.
    pub alpha: f64,
    pub case: Option<StepTag>,
    /// `tan θ` of the step direction against `−∇f`; `NaN` for the start point.
    pub t: f64,
    pub cos_theta: f64,
    pub step: Option<StepInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIterReached,
    LineSearchFailure,
    DegenerateStop,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "Converged",
            RunStatus::MaxIterReached => "MaxIterReached",
            RunStatus::LineSearchFailure => "LineSearchFailure",
            RunStatus::DegenerateStop => "DegenerateStop",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub method: Method,
    pub rule: StepRule,
    pub records: Vec<IterateRecord>,
    pub status: RunStatus,
    pub iters: usize,
    pub max_t: f64,
    /// Why the run stopped early, if it did.
    pub message: Option<String>,
}

impl RunReport {
    pub fn last(&self) -> &IterateRecord {
        self.records
            .last()
            .expect("a report always holds the start point")
    }

    pub fn final_x(&self) -> &RealVector {
        &self.last().x
    }
}

struct Proposal {
    d: RealVector,
    tag: StepTag,
    t: f64,
    cos_theta: f64,
    scale: f64,
    /// Take `α = 1` regardless of the configured rule.
    unit: bool,
}

fn angle_terms(g: &RealVector, d: &RealVector) -> (f64, f64) {
    let cos = -g.dot(d) / (g.norm() * d.norm());
    let t = (1.0 - cos * cos).max(0.0).sqrt() / cos;
    (t, cos)
}

fn start_record(obj: &dyn Objective, x: &RealVector) -> (IterateRecord, RealVector) {
    let g = obj.gradient(x);
    let rec = IterateRecord {
        k: 0,
        x: x.clone(),
        f: obj.value(x),
        grad_norm: g.norm(),
        alpha: 0.0,
        case: None,
        t: f64::NAN,
        cos_theta: f64::NAN,
        step: None,
    };
    (rec, g)
}

enum StepOutcome {
    Taken(f64, f64, Option<LineSearchResult>),
    Failed(String),
}

#[allow(clippy::too_many_arguments)]
fn take_step(
    obj: &dyn Objective,
    x: &RealVector,
    f0: f64,
    d: &RealVector,
    slope: f64,
    rule: &StepRule,
    unit: bool,
    bb: Option<(&RealVector, &RealVector, BbVariant)>,
) -> StepOutcome {
    let phi = |a: f64| obj.value(&(x + d * a));
    let unit_step = |a: f64| {
        let f = phi(a);
        if f.is_finite() {
            StepOutcome::Taken(a, f, None)
        } else {
            StepOutcome::Failed(format!("step {a} leaves the domain"))
        }
    };
    if unit {
        return unit_step(1.0);
    }
    let result = match rule {
        StepRule::Fixed(a) => return unit_step(*a),
        StepRule::Unit => return unit_step(1.0),
        StepRule::Search(LineSearchSpec::Exact(p)) => exact_search(phi, p.alpha_max, p.tol),
        StepRule::Search(LineSearchSpec::Armijo(p)) => {
            let mut params = *p;
            if p.use_bb {
                if let Some((s, y, variant)) = bb {
                    params.alpha0 = bb_initial_step(s, y, variant, p.alpha_min_bb, p.alpha_max_bb);
                }
            }
            armijo_backtrack(phi, slope, &params)
        }
        StepRule::Search(LineSearchSpec::StrongWolfe(p)) => {
            let dphi = |a: f64| {
                let xa = x + d * a;
                if obj.in_domain(&xa) {
                    obj.gradient(&xa).dot(d)
                } else {
                    f64::NAN
                }
            };
            strong_wolfe_search(phi, dphi, p)
        }
    };
    match result {
        Ok(r) if r.status == LineSearchStatus::Accepted && r.f_new < f0 => {
            StepOutcome::Taken(r.alpha, r.f_new, Some(r))
        }
        Ok(r) => StepOutcome::Failed(format!("line search ended with {}", r.status)),
        Err(e) => StepOutcome::Failed(e.to_string()),
    }
}

fn run_loop<P>(
    problem: &Problem,
    method: Method,
    rule: StepRule,
    stop: &StoppingSpec,
    bb: BbVariant,
    mut propose: P,
) -> RunReport
where
    P: FnMut(&RealVector, &RealVector) -> Result<Proposal>,
{
    let obj: &dyn Objective = &*problem.objective;
    let (first, mut g) = start_record(obj, &problem.x0);
    let mut records = vec![first];
    let mut prev_step: Option<(RealVector, RealVector)> = None;
    let mut max_t: f64 = 0.0;
    let mut message = None;
    let status = loop {
        let cur = records.last().expect("nonempty");
        if cur.grad_norm <= stop.tol_grad {
            break RunStatus::Converged;
        }
        if records.len() > stop.max_iter {
            break RunStatus::MaxIterReached;
        }
        let x = cur.x.clone();
        let f0 = cur.f;
        let proposal = match propose(&x, &g) {
            Ok(p) => p,
            Err(e) => {
                message = Some(e.to_string());
                break RunStatus::DegenerateStop;
            }
        };
        let d = proposal.d * proposal.scale;
        if d.iter().any(|v| !v.is_finite()) {
            message = Some("non-finite direction".into());
            break RunStatus::DegenerateStop;
        }
        let slope = g.dot(&d);
        let bb_info = prev_step.as_ref().map(|(s, y)| (s, y, bb));
        let (alpha, f_new, ls) =
            match take_step(obj, &x, f0, &d, slope, &rule, proposal.unit, bb_info) {
                StepOutcome::Taken(a, f, ls) => (a, f, ls),
                StepOutcome::Failed(msg) => {
                    message = Some(msg);
                    break RunStatus::LineSearchFailure;
                }
            };
        let x_new = &x + &d * alpha;
        let g_new = obj.gradient(&x_new);
        if proposal.tag != StepTag::Newton {
            max_t = max_t.max(proposal.t);
        }
        prev_step = Some((&x_new - &x, &g_new - &g));
        records.push(IterateRecord {
            k: records.len(),
            grad_norm: g_new.norm(),
            x: x_new,
            f: f_new,
            alpha,
            case: Some(proposal.tag),
            t: proposal.t,
            cos_theta: proposal.cos_theta,
            step: Some(StepInfo {
                direction: d,
                slope,
                scale: proposal.scale,
                f_prev: f0,
                line_search: ls,
            }),
        });
        g = g_new;
    };
    RunReport {
        method,
        rule,
        iters: records.len() - 1,
        records,
        status,
        max_t,
        message,
    }
}

fn curvature_scale(obj: &dyn Objective, x: &RealVector, g: &RealVector, d: &RealVector) -> f64 {
    let curvature = d.dot(&(obj.hessian(x) * d));
    let s = -g.dot(d) / curvature;
    if s.is_finite() && s > 0.0 {
        s.min(MAX_CURVATURE_SCALE)
    } else {
        1.0
    }
}

/// Runs YAND with the default direction options.
pub fn yand_run(problem: &Problem, ls: &LineSearchSpec, stop: &StoppingSpec) -> RunReport {
    yand_run_with(problem, ls, stop, &YandOptions::default())
}

pub fn yand_run_with(
    problem: &Problem,
    ls: &LineSearchSpec,
    stop: &StoppingSpec,
    opts: &YandOptions,
) -> RunReport {
    let obj: &dyn Objective = &*problem.objective;
    run_loop(
        problem,
        Method::Yand,
        StepRule::Search(*ls),
        stop,
        opts.bb_variant,
        |x, g| {
            let r = descent_direction(obj, x, opts.eps_orth)?;
            let scale = match opts.scaling {
                DirectionScaling::Unit => 1.0,
                DirectionScaling::Curvature => curvature_scale(obj, x, g, &r.d),
            };
            Ok(Proposal {
                d: r.d,
                tag: StepTag::Direction(r.case),
                t: r.t,
                cos_theta: r.cos_theta,
                scale,
                unit: false,
            })
        },
    )
}

/// Gradient descent along the unnormalized `−∇f`.
pub fn gradient_descent_run(problem: &Problem, step: &StepRule, stop: &StoppingSpec) -> RunReport {
    run_loop(
        problem,
        Method::GradientDescent,
        *step,
        stop,
        BbVariant::BB1,
        |_, g| {
            Ok(Proposal {
                d: -g,
                tag: StepTag::Direction(DirectionCase::SteepestFallback),
                t: 0.0,
                cos_theta: 1.0,
                scale: 1.0,
                unit: false,
            })
        },
    )
}

/// Newton's method; `damped` shifts indefinite Hessians before solving.
///
/// Without damping a positive definite Hessian gets the unit step, otherwise
/// `step` decides.
pub fn newton_run(
    problem: &Problem,
    damped: bool,
    step: &StepRule,
    stop: &StoppingSpec,
) -> RunReport {
    let obj: &dyn Objective = &*problem.objective;
    let method = if damped {
        Method::DampedNewton
    } else {
        Method::Newton
    };
    run_loop(problem, method, *step, stop, BbVariant::BB1, |x, g| {
        let d = newton_direction(obj, x, damped)?;
        let spd = classify_symmetric(&obj.hessian(x))
            .map(|c| c.tag == SymmetricTag::PositiveDefinite)
            .unwrap_or(false);
        let (t, cos_theta) = angle_terms(g, &d);
        Ok(Proposal {
            d,
            tag: StepTag::Newton,
            t,
            cos_theta,
            scale: 1.0,
            unit: !damped && spd,
        })
    })
}

/// Per-step convergence ratios of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// `(f_{k+1} − f*) / (f_k − f*)`, when `f*` is known.
    pub linear: Vec<f64>,
    /// `‖x_{k+1} − x*‖ / ‖x_k − x*‖²`, when `x*` is known.
    pub quadratic: Vec<f64>,
}

pub fn empirical_rates(
    report: &RunReport,
    x_star: Option<&RealVector>,
    f_star: Option<f64>,
) -> Result<RateTable> {
    if x_star.is_none() && f_star.is_none() {
        return Err(YandError::MissingReference);
    }
    let pairs = report.records.windows(2);
    let linear = match f_star {
        Some(fs) => pairs
            .clone()
            .map(|w| (w[1].f - fs) / (w[0].f - fs))
            .collect(),
        None => Vec::new(),
    };
    let quadratic = match x_star {
        Some(xs) => pairs
            .map(|w| (&w[1].x - xs).norm() / (&w[0].x - xs).norm_squared())
            .collect(),
        None => Vec::new(),
    };
    Ok(RateTable { linear, quadratic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{catalog, make_affine_scaled};

    #[test]
    fn quad_well_one_step() {
        let p = catalog("quad_well").unwrap();
        let r = yand_run(&p, &LineSearchSpec::exact(), &StoppingSpec::default());
        assert_eq!(r.status, RunStatus::Converged);
        assert_eq!(r.iters, 1);
        assert!((r.final_x() - p.x_star.clone().unwrap()).amax() <= 1e-8);
        let rates = empirical_rates(&r, None, p.f_star).unwrap();
        assert!(rates.linear[0].abs() <= 1e-12);
    }

    #[test]
    fn affine_scaled_exact_is_one_step() {
        for gamma in [1.0, 10.0, 1e2, 1e3, 1e4] {
            let (p, _) = make_affine_scaled(gamma);
            let r = yand_run(&p, &LineSearchSpec::exact(), &StoppingSpec::default());
            assert_eq!(
                (r.status, r.iters),
                (RunStatus::Converged, 1),
                "gamma {gamma}"
            );
            let n = newton_run(&p, false, &StepRule::Unit, &StoppingSpec::default());
            assert_eq!(
                (n.status, n.iters),
                (RunStatus::Converged, 1),
                "gamma {gamma}"
            );
        }
    }

    #[test]
    fn gd_fixed_steps() {
        let (p, _) = make_affine_scaled(1.0);
        let r = gradient_descent_run(&p, &StepRule::Fixed(1.0), &StoppingSpec::default());
        assert_eq!((r.status, r.iters), (RunStatus::Converged, 1));
        let (p, _) = make_affine_scaled(10.0);
        let r = gradient_descent_run(&p, &StepRule::Fixed(0.01), &StoppingSpec::default());
        assert_eq!((r.status, r.iters), (RunStatus::MaxIterReached, 200));
    }

    #[test]
    fn gd_exact_on_moderate_scaling() {
        let (p, _) = make_affine_scaled(100.0);
        let r = gradient_descent_run(
            &p,
            &StepRule::Search(LineSearchSpec::exact()),
            &StoppingSpec::default(),
        );
        assert_eq!(r.status, RunStatus::Converged);
        assert!(r.iters <= 10, "{}", r.iters);
    }

    #[test]
    fn start_record_conventions() {
        let p = catalog("rosenbrock").unwrap();
        let r = yand_run(
            &p,
            &LineSearchSpec::armijo(),
            &StoppingSpec {
                tol_grad: 1e-4,
                max_iter: 3,
            },
        );
        let first = &r.records[0];
        assert_eq!(first.alpha, 0.0);
        assert!(first.case.is_none() && first.t.is_nan() && first.cos_theta.is_nan());
        assert_eq!(r.records.len(), r.iters + 1);
        assert_eq!(r.status, RunStatus::MaxIterReached);
    }

    #[test]
    fn missing_reference() {
        let p = catalog("quad_well").unwrap();
        let r = yand_run(&p, &LineSearchSpec::exact(), &StoppingSpec::default());
        assert_eq!(
            empirical_rates(&r, None, None).unwrap_err(),
            YandError::MissingReference
        );
    }
}
