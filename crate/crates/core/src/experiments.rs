//! Drivers for the reproduction experiments: the affine-scaling table, the
//! worked examples, the invariance sweep and the derivative audit.

use std::fmt;
use std::thread;

use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::direction::{affine_normal_direction, block_decompose, newton_direction};
use crate::error::Result;
use crate::invariance::{run_invariance, InvarianceReport};
use crate::numerics::{angle_between, RealMatrix, RealVector};
use crate::objective::{verify_derivatives, DerivativeReport};
use crate::optimizer::{
    gradient_descent_run, newton_run, yand_run_with, RunReport, RunStatus, StepRule,
};
use crate::problems::{catalog, make_affine_scaled, Problem, CATALOG};
use crate::slice_centroid::{slice_centroid_direction, SliceParams};

pub const TABLE2_GAMMAS: [f64; 5] = [1.0, 10.0, 1e2, 1e3, 1e4];

/// Iteration count and termination status of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub iters: usize,
    pub status: RunStatus,
}

impl Cell {
    fn of(r: &RunReport) -> Self {
        Cell {
            iters: r.iters,
            status: r.status,
        }
    }
}

impl fmt::Display for Cell {
    /// `200*` marks the iteration cap; `!` marks any other failure.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            RunStatus::Converged => write!(f, "{}", self.iters),
            RunStatus::MaxIterReached => write!(f, "{}*", self.iters),
            _ => write!(f, "{}!", self.iters),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub gamma: f64,
    pub kappa_b: f64,
    pub kappa_h: f64,
    pub yand_exact: Cell,
    pub yand_wolfe: Cell,
    pub yand_armijo: Cell,
    pub gd_exact: Cell,
    pub gd_fixed: Cell,
    pub newton: Cell,
}

impl Table2Row {
    pub fn cells(&self) -> [Cell; 6] {
        [
            self.yand_exact,
            self.yand_wolfe,
            self.yand_armijo,
            self.gd_exact,
            self.gd_fixed,
            self.newton,
        ]
    }
}

pub const TABLE2_HEADER: &str =
    "gamma,kappaB,kappaH,yand_exact,yand_wolfe,yand_armijo,gd_exact,gd_fixed,newton";

pub fn table2_row(gamma: f64, cfg: &Config) -> Table2Row {
    let (p, spec) = make_affine_scaled(gamma);
    let stop = cfg.stopping();
    let opts = cfg.yand_options();
    let yand = |ls| Cell::of(&yand_run_with(&p, &ls, &stop, &opts));
    Table2Row {
        gamma,
        kappa_b: spec.kappa_map(),
        kappa_h: spec.kappa_hessian(),
        yand_exact: yand(cfg.exact()),
        yand_wolfe: yand(cfg.wolfe()),
        yand_armijo: yand(cfg.armijo()),
        gd_exact: Cell::of(&gradient_descent_run(
            &p,
            &StepRule::Search(cfg.exact()),
            &stop,
        )),
        gd_fixed: Cell::of(&gradient_descent_run(
            &p,
            &StepRule::Fixed(1.0 / (gamma * gamma)),
            &stop,
        )),
        newton: Cell::of(&newton_run(&p, false, &StepRule::Unit, &stop)),
    }
}

/// All rows, computed concurrently and returned in `TABLE2_GAMMAS` order.
pub fn table2(cfg: &Config) -> Vec<Table2Row> {
    thread::scope(|s| {
        let handles: Vec<_> = TABLE2_GAMMAS
            .iter()
            .map(|&g| s.spawn(move || table2_row(g, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("table row panicked"))
            .collect()
    })
}

/// One comparison of a computed quantity with its reference value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub computed: String,
    pub expected: String,
    pub passed: bool,
    /// Non-gating checks are reported but do not affect the exit status.
    pub gating: bool,
}

impl Check {
    fn new(name: &str, computed: String, expected: &str, passed: bool) -> Self {
        Check {
            name: name.into(),
            computed,
            expected: expected.into(),
            passed,
            gating: true,
        }
    }

    fn observation(mut self) -> Self {
        self.gating = false;
        self
    }
}

fn vec_str(v: &RealVector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("({})", parts.join(", "))
}

/// Line angle between two directions, ignoring orientation.
fn line_angle(a: &RealVector, b: &RealVector) -> f64 {
    let th = angle_between(a, b);
    th.min(std::f64::consts::PI - th)
}

/// Tangential coefficient re-expressed for a tangent oriented like `reference`.
fn oriented_tau(tau: f64, tangent: &RealVector, reference: &RealVector) -> f64 {
    if tangent.dot(reference) >= 0.0 {
        tau
    } else {
        -tau
    }
}

/// Checks of the worked examples and the nonconvex slice-centroid example.
pub fn worked_example_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let p = catalog("quad_51")?;
    let obj = &*p.objective;
    let (tau, d) = affine_normal_direction(obj, &p.x0)?;
    let t_hat = block_decompose(obj, &p.x0)?.frame.tangent(0);
    let tau = oriented_tau(tau[0], &t_hat, &dvector![4.0, 1.0]);
    out.push(Check::new(
        "quad_51 tau",
        format!("{tau:.17}"),
        "-0.6",
        (tau + 0.6).abs() <= 1e-14,
    ));
    let angle = angle_between(&d, &dvector![-1.0, 1.0]);
    out.push(Check::new(
        "quad_51 d_AN direction",
        vec_str(&d),
        "parallel to (-1, 1) within 1e-10 rad",
        angle <= 1e-10,
    ));
    let dn = newton_direction(obj, &p.x0, false)?;
    out.push(Check::new(
        "quad_51 Newton direction",
        vec_str(&dn),
        "(-1, 1)",
        (&dn - dvector![-1.0, 1.0]).amax() <= 1e-12,
    ));
    let params = SliceParams::for_point(obj, &p.x0, 1e-3)?;
    let d_sc = slice_centroid_direction(obj, &p.x0, &params)?;
    let angle = angle_between(&d_sc, &d);
    out.push(Check::new(
        "quad_51 slice-centroid vs d_AN (delta=1e-3)",
        format!("angle {angle:.3e} rad"),
        "<= 1e-2 rad",
        angle <= 1e-2,
    ));

    let p = catalog("quad_52")?;
    let obj = &*p.objective;
    let (_, d) = affine_normal_direction(obj, &p.x0)?;
    let target = dvector![-1.0, 0.0, 0.0];
    out.push(Check::new(
        "quad_52 d_AN",
        vec_str(&d),
        "(-1, 0, 0)",
        (&d - &target).amax() <= 1e-14,
    ));
    let dn = newton_direction(obj, &p.x0, false)?;
    out.push(Check::new(
        "quad_52 Newton direction",
        vec_str(&dn),
        "(-1, 0, 0)",
        (&dn - &target).amax() <= 1e-12,
    ));

    let p = catalog("convex_53")?;
    let obj = &*p.objective;
    let (tau, d) = affine_normal_direction(obj, &p.x0)?;
    let t_hat = block_decompose(obj, &p.x0)?.frame.tangent(0);
    let tau = oriented_tau(tau[0], &t_hat, &dvector![-3.0, 1.0]);
    out.push(Check::new(
        "convex_53 tau",
        format!("{tau:.10}"),
        "0.7687 +- 1e-3",
        (tau - 0.7687).abs() <= 1e-3,
    ));
    let expected = dvector![-1.0454, -0.7056];
    out.push(Check::new(
        "convex_53 d_AN",
        vec_str(&d),
        "(-1.0454, -0.7056) +- 1e-3",
        (&d - &expected).amax() <= 1e-3,
    ));
    let slope = obj.gradient(&p.x0).dot(&d);
    out.push(Check::new(
        "convex_53 <grad f, d>",
        format!("{slope:.10}"),
        "-4.2164 +- 1e-3",
        (slope + 4.2164).abs() <= 1e-3,
    ));

    let p = catalog("counterexample")?;
    let obj = &*p.objective;
    let params = SliceParams::for_point(obj, &p.x0, 1e-2)?;
    let d_sc = slice_centroid_direction(obj, &p.x0, &params)?;
    let angle = line_angle(&d_sc, &dvector![0.0, 1.0]);
    out.push(Check::new(
        "counterexample slice-centroid axis (delta=1e-2)",
        format!("{} (angle {angle:.3e})", vec_str(&d_sc)),
        "parallel to (0, 1) within 1e-6",
        angle <= 1e-6,
    ));
    let slope = obj.gradient(&p.x0).dot(&d_sc);
    out.push(
        Check::new(
            "counterexample <grad f, d_SC> sign",
            format!("{slope:.10}"),
            "> 0 (ascent)",
            slope > 0.0,
        )
        .observation(),
    );
    Ok(out)
}

pub const INVARIANCE_HEADER: &str = "gamma,max_deviation,iters_scaled,iters_base";

/// Invariance runs on the strongly convex base problem with `B = diag(1, γ)`.
pub fn invariance_sweep(gammas: &[f64], cfg: &Config) -> Result<Vec<InvarianceReport>> {
    let base = catalog("strongly_convex_base")?;
    let stop = cfg.stopping();
    let ls = cfg.exact();
    thread::scope(|s| {
        let handles: Vec<_> = gammas
            .iter()
            .map(|&g| {
                let base = &base;
                s.spawn(move || {
                    let b = RealMatrix::from_diagonal(&dvector![1.0, g]);
                    run_invariance(base, &b, &ls, &stop)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("invariance run panicked"))
            .collect()
    })
}

/// Random points for derivative checks near a problem's start point.
///
/// Barrier points are kept at `x₁ + x₂ ≤ 1/2` so finite-difference stencils
/// stay well inside the domain.
pub fn verification_points(problem: &Problem, count: usize, seed: u64) -> Vec<RealVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.dim();
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let x = if problem.name == "inverse_barrier" {
            RealVector::from_fn(n, |_, _| rng.random_range(-1.0..0.75))
        } else {
            RealVector::from_fn(n, |i, _| problem.x0[i] + rng.random_range(-0.5..0.5))
        };
        let barrier_ok = problem.name != "inverse_barrier" || x.sum() <= 0.5;
        if problem.objective.in_domain(&x) && barrier_ok {
            points.push(x);
        }
    }
    points
}

/// Derivative audit of every catalog problem at `points_per_problem` seeded points.
pub fn verify_catalog(
    points_per_problem: usize,
    seed: u64,
) -> Result<Vec<(String, DerivativeReport)>> {
    CATALOG
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let p = catalog(name)?;
            let pts = verification_points(&p, points_per_problem, seed.wrapping_add(i as u64));
            Ok((name.to_string(), verify_derivatives(&*p.objective, &pts)))
        })
        .collect()
}
