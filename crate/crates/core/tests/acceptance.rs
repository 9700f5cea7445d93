//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any of them fails.

use std::process::ExitCode;

use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use yand_core::direction::{block_decompose, descent_direction_in_frame};
use yand_core::experiments::{table2, verify_catalog};
use yand_core::line_search::{ArmijoParams, WolfeParams};
use yand_core::numerics::{angle_between, build_normal_aligned_frame};
use yand_core::optimizer::RunStatus;
use yand_core::problems::{inverse_barrier_optimum, Quadratic, CATALOG};
use yand_core::slice_centroid::{slice_centroid_direction, SliceParams};
use yand_core::{
    affine_normal_direction, catalog, descent_direction, empirical_rates, gradient_descent_run,
    newton_run, run_invariance, yand_run, Config, LineSearchSpec, Objective, Problem, RealMatrix,
    RealVector, RunReport, StepRule, StoppingSpec, EPS_ORTH,
};

const BARRIER_F_STAR: f64 = 0.7107265761;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn searches() -> [LineSearchSpec; 3] {
    [
        LineSearchSpec::exact(),
        LineSearchSpec::strong_wolfe(),
        LineSearchSpec::armijo(),
    ]
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    let m = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &m * m.transpose() + RealMatrix::identity(n, n) * 0.5
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    let m = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

fn monotone(r: &RunReport) -> bool {
    r.records.windows(2).all(|w| w[1].f < w[0].f)
}

fn one_step_quadratics() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["quad_well", "quad_51"] {
        let p = catalog(name).unwrap();
        let r = yand_run(&p, &LineSearchSpec::exact(), &StoppingSpec::default());
        let err = (r.final_x() - p.x_star.as_ref().unwrap()).amax();
        ok &= r.status == RunStatus::Converged && r.iters == 1 && err <= 1e-8;
        notes.push(format!(
            "{name}: {} iters={} err={err:.2e}",
            r.status, r.iters
        ));
    }
    outcome(ok, notes.join("; "))
}

fn newton_collinearity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let a = random_spd(&mut rng, n);
        let b = RealVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let x = RealVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let q = Quadratic::new(a.clone(), b);
        let g = q.gradient(&x);
        let d_n = -a.cholesky().unwrap().solve(&g);
        let (_, d_an) = affine_normal_direction(&q, &x).unwrap();
        worst = worst.max(angle_between(&d_an, &d_n));
    }
    outcome(
        worst <= 1e-8,
        format!("max angle {worst:.2e} rad over 50 quadratics"),
    )
}

fn worked_examples() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();

    let p = catalog("quad_51").unwrap();
    let (tau, _) = affine_normal_direction(&*p.objective, &p.x0).unwrap();
    let t_hat = block_decompose(&*p.objective, &p.x0)
        .unwrap()
        .frame
        .tangent(0);
    let tau = if t_hat.dot(&dvector![4.0, 1.0]) >= 0.0 {
        tau[0]
    } else {
        -tau[0]
    };
    ok &= (tau + 0.6).abs() <= 1e-14;
    notes.push(format!("tau={tau:.17}"));

    let p = catalog("quad_52").unwrap();
    let (_, d) = affine_normal_direction(&*p.objective, &p.x0).unwrap();
    ok &= (&d - dvector![-1.0, 0.0, 0.0]).amax() <= 1e-14;
    notes.push(format!("d=({:.3},{:.3},{:.3})", d[0], d[1], d[2]));

    let p = catalog("convex_53").unwrap();
    let obj = &*p.objective;
    let (tau, d) = affine_normal_direction(obj, &p.x0).unwrap();
    let t_hat = block_decompose(obj, &p.x0).unwrap().frame.tangent(0);
    let tau = if t_hat.dot(&dvector![-3.0, 1.0]) >= 0.0 {
        tau[0]
    } else {
        -tau[0]
    };
    let slope = obj.gradient(&p.x0).dot(&d);
    ok &= (tau - 0.7687).abs() <= 1e-3;
    ok &= (&d - dvector![-1.0454, -0.7056]).amax() <= 1e-3;
    ok &= (slope + 4.2164).abs() <= 1e-3;
    notes.push(format!(
        "tau={tau:.4} d=({:.4},{:.4}) slope={slope:.4}",
        d[0], d[1]
    ));
    outcome(ok, notes.join("; "))
}

fn affine_scaling_table() -> Outcome {
    let rows = table2(&Config::default());
    let mut ok = true;
    let mut notes = Vec::new();
    for row in &rows {
        let gd_fixed_ok = if row.gamma == 1.0 {
            row.gd_fixed.status == RunStatus::Converged && row.gd_fixed.iters == 1
        } else {
            row.gd_fixed.status == RunStatus::MaxIterReached && row.gd_fixed.iters == 200
        };
        let conv = |c: &yand_core::experiments::Cell, max: usize| {
            c.status == RunStatus::Converged && c.iters <= max
        };
        ok &= conv(&row.yand_exact, 1) && row.yand_exact.iters == 1;
        ok &= conv(&row.newton, 1) && row.newton.iters == 1;
        ok &= gd_fixed_ok;
        ok &= conv(&row.gd_exact, 10);
        ok &= conv(&row.yand_wolfe, 20) && conv(&row.yand_armijo, 20);
        let cells: Vec<String> = row.cells().iter().map(|c| c.to_string()).collect();
        notes.push(format!("g={:e}: {}", row.gamma, cells.join(",")));
    }
    outcome(ok, notes.join("; "))
}

fn inverse_barrier() -> Outcome {
    let p = catalog("inverse_barrier").unwrap();
    let (x_star, _) = inverse_barrier_optimum();
    let mut ok = true;
    let mut notes = Vec::new();
    for ls in searches() {
        let r = yand_run(&p, &ls, &StoppingSpec::default());
        let feasible = r
            .records
            .iter()
            .all(|rec| rec.x.sum() < 1.0 && rec.f.is_finite());
        let err = (r.final_x() - &x_star).norm();
        let ferr = (r.last().f - BARRIER_F_STAR).abs();
        ok &= r.status == RunStatus::Converged && err <= 1e-5 && ferr <= 1e-8 && feasible;
        notes.push(format!(
            "{}: {} err={err:.1e} ferr={ferr:.1e}",
            ls.name(),
            r.status
        ));
    }
    outcome(ok, notes.join("; "))
}

fn rosenbrock() -> Outcome {
    let p = catalog("rosenbrock").unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for ls in searches() {
        let r = yand_run(&p, &ls, &StoppingSpec::default());
        ok &= r.status == RunStatus::Converged && r.last().grad_norm <= 1e-4 && r.iters <= 200;
        notes.push(format!("{}: {} in {}", ls.name(), r.status, r.iters));
    }
    outcome(ok, notes.join("; "))
}

fn nonconvex() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["ring_tilted", "saddle_poly", "four_well"] {
        let p = catalog(name).unwrap();
        for ls in searches() {
            let r = yand_run(&p, &ls, &StoppingSpec::default());
            let good =
                r.status == RunStatus::Converged && r.last().grad_norm <= 1e-4 && monotone(&r);
            ok &= good;
            if !good {
                notes.push(format!("{name}/{}: {}", ls.name(), r.status));
            }
        }
    }
    let trap = catalog("four_well")
        .unwrap()
        .with_start(dvector![0.0, -1.5]);
    for ls in searches() {
        let r = yand_run(&trap, &ls, &StoppingSpec::default());
        let on_axis = r.records.iter().all(|rec| rec.x[0].abs() <= 1e-12);
        let x = r.final_x();
        let err = (x - dvector![0.0, 1.0])
            .amax()
            .min((x - dvector![0.0, -1.0]).amax());
        ok &= on_axis && err <= 1e-5;
        notes.push(format!("trap/{}: ({:.6},{:.6})", ls.name(), x[0], x[1]));
    }
    outcome(ok, notes.join("; "))
}

fn slice_angle(p: &Problem, delta: f64) -> f64 {
    let obj = &*p.objective;
    let params = SliceParams::for_point(obj, &p.x0, delta).unwrap();
    let d_sc = slice_centroid_direction(obj, &p.x0, &params).unwrap();
    let (_, d_an) = affine_normal_direction(obj, &p.x0).unwrap();
    angle_between(&d_sc, &d_an)
}

fn slice_errors(p: &Problem) -> (Vec<f64>, Vec<f64>) {
    let deltas = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let errs: Vec<f64> = deltas.iter().map(|&d| slice_angle(p, d)).collect();
    let ratios = errs.windows(2).map(|w| w[1] / w[0]).collect();
    (errs, ratios)
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn slice_equivalence() -> Outcome {
    let p = catalog("quad_51").unwrap();
    let angle = slice_angle(&p, 1e-3);
    let (errs, ratios) = slice_errors(&p);
    let ratio_ok = ratios.iter().all(|r| (0.25..=0.75).contains(r));
    outcome(
        angle <= 1e-2 && ratio_ok,
        format!(
            "angle(1e-3)={angle:.2e}; errors {}; halving ratios {ratios:.3?}",
            sci(&errs)
        ),
    )
}

fn slice_first_order_non_quadratic() -> Outcome {
    let p = catalog("convex_53").unwrap();
    let (errs, ratios) = slice_errors(&p);
    let ok = ratios.iter().all(|r| (0.25..=0.75).contains(r));
    outcome(
        ok,
        format!("errors {}; halving ratios {ratios:.3?}", sci(&errs)),
    )
}

fn counterexample() -> Outcome {
    let p = catalog("counterexample").unwrap();
    let obj = &*p.objective;
    let params = SliceParams::for_point(obj, &p.x0, 1e-2).unwrap();
    let d = slice_centroid_direction(obj, &p.x0, &params).unwrap();
    let th = angle_between(&d, &dvector![0.0, 1.0]);
    let line = th.min(std::f64::consts::PI - th);
    let slope = obj.gradient(&p.x0).dot(&d);
    outcome(
        line <= 1e-6 && slope > 0.0,
        format!(
            "d=({:.6},{:.6}) line angle {line:.1e}; <grad f, d>={slope:.6}",
            d[0], d[1]
        ),
    )
}

fn catalog_runs() -> Vec<(String, RunReport)> {
    let mut out = Vec::new();
    for name in CATALOG {
        let p = catalog(name).unwrap();
        for ls in searches() {
            out.push((
                format!("{name}/yand/{}", ls.name()),
                yand_run(&p, &ls, &StoppingSpec::default()),
            ));
        }
    }
    out
}

fn angle_identity(runs: &[(String, RunReport)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (_, r) in runs {
        for rec in r.records.iter().skip(1) {
            let v = rec.cos_theta * (1.0 + rec.t * rec.t).sqrt();
            worst = worst.max((v - 1.0).abs());
            count += 1;
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max |cos*sqrt(1+T^2) - 1| = {worst:.2e} over {count} iterates"),
    )
}

fn all_method_runs(yand: Vec<(String, RunReport)>) -> Vec<(String, RunReport)> {
    let mut runs = yand;
    let stop = StoppingSpec::default();
    for name in CATALOG {
        let p = catalog(name).unwrap();
        for ls in searches() {
            let rule = StepRule::Search(ls);
            runs.push((
                format!("{name}/gd/{}", ls.name()),
                gradient_descent_run(&p, &rule, &stop),
            ));
            runs.push((
                format!("{name}/damped/{}", ls.name()),
                newton_run(&p, true, &rule, &stop),
            ));
        }
    }
    runs
}

fn line_search_contracts(runs: &[(String, RunReport)]) -> Outcome {
    let armijo = ArmijoParams::default();
    let wolfe = WolfeParams::default();
    let mut steps = 0;
    let mut bad = Vec::new();
    for (label, r) in runs {
        let p = catalog(label.split('/').next().unwrap()).unwrap();
        let obj = &*p.objective;
        for w in r.records.windows(2) {
            let (prev, rec) = (&w[0], &w[1]);
            let Some(step) = &rec.step else { continue };
            steps += 1;
            let slack = 1e-12 * prev.f.abs().max(1.0);
            let mut ok = rec.f < prev.f;
            match r.rule {
                StepRule::Search(LineSearchSpec::Armijo(_)) => {
                    ok &= yand_core::line_search::armijo_holds(
                        prev.f,
                        step.slope,
                        rec.alpha,
                        rec.f,
                        armijo.sigma,
                        slack,
                    );
                }
                StepRule::Search(LineSearchSpec::StrongWolfe(_)) => {
                    let dphi = obj.gradient(&rec.x).dot(&step.direction);
                    ok &= yand_core::line_search::strong_wolfe_holds(
                        prev.f, step.slope, rec.alpha, rec.f, dphi, wolfe.c1, wolfe.c2, slack,
                    );
                }
                _ => {}
            }
            if !ok {
                bad.push(format!("{label} k={}", rec.k));
            }
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{steps} accepted steps over {} runs", runs.len())
        } else {
            format!("violations: {}", bad.join(", "))
        },
    )
}

fn affine_invariance() -> Outcome {
    let base = catalog("strongly_convex_base").unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for gamma in [10.0, 1e2, 1e4] {
        let b = RealMatrix::from_diagonal(&dvector![1.0, gamma]);
        let rep = run_invariance(
            &base,
            &b,
            &LineSearchSpec::exact(),
            &StoppingSpec::default(),
        )
        .unwrap();
        let dev = rep
            .per_iterate_deviation
            .iter()
            .take(11)
            .fold(0.0f64, |a, &v| a.max(v));
        ok &= dev <= 1e-6 && rep.iters_scaled == rep.iters_base;
        notes.push(format!(
            "g={gamma:e}: dev={dev:.1e} iters {}/{}",
            rep.iters_scaled, rep.iters_base
        ));
    }
    outcome(ok, notes.join("; "))
}

fn derivative_oracle() -> Outcome {
    let reports = verify_catalog(5, 42).unwrap();
    let failing: Vec<&str> = reports
        .iter()
        .filter(|(_, r)| !r.passes(yand_core::DerivativeReport::THRESHOLDS))
        .map(|(n, _)| n.as_str())
        .collect();
    outcome(
        failing.is_empty(),
        format!("{} problems checked; failing: {failing:?}", reports.len()),
    )
}

fn local_quadratic_rate() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["quad_well", "poly6"] {
        let p = catalog(name).unwrap();
        let r = yand_run(&p, &LineSearchSpec::armijo(), &StoppingSpec::default());
        let rates = empirical_rates(&r, p.x_star.as_ref(), None).unwrap();
        let q = &rates.quadratic;
        let tail = &q[q.len().saturating_sub(2)..];
        let alphas: Vec<f64> = r.records.iter().skip(1).map(|rec| rec.alpha).collect();
        let last_alphas = &alphas[alphas.len().saturating_sub(2)..];
        ok &= r.status == RunStatus::Converged && !tail.is_empty();
        ok &= tail.iter().all(|v| v.is_finite() && *v <= 1e3);
        ok &= last_alphas.iter().all(|&a| a == 1.0);
        notes.push(format!("{name}: ratios {tail:.3?} alphas {last_alphas:?}"));
    }
    outcome(ok, notes.join("; "))
}

fn frame_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let problems: Vec<Problem> = CATALOG.iter().map(|n| catalog(n).unwrap()).collect();
    let mut worst = 0.0f64;
    let mut tested = 0;
    while tested < 200 {
        let p = &problems[tested % problems.len()];
        let obj = &*p.objective;
        let x = RealVector::from_fn(p.dim(), |i, _| p.x0[i] + rng.random_range(-0.5..0.5));
        if !obj.in_domain(&x) || obj.gradient(&x).norm() < 1e-8 {
            continue;
        }
        let base = descent_direction(obj, &x, EPS_ORTH).unwrap();
        let frame = build_normal_aligned_frame(&obj.gradient(&x)).unwrap();
        let r = random_orthogonal(&mut rng, frame.tangent_dim());
        let rotated =
            descent_direction_in_frame(obj, &x, &frame.rotate_tangents(&r).unwrap(), EPS_ORTH);
        let rel = (&rotated.d - &base.d).norm() / base.d.norm();
        worst = worst.max(rel);
        tested += 1;
    }
    outcome(
        worst <= 1e-9,
        format!("max relative change {worst:.2e} over {tested} points"),
    )
}

fn main() -> ExitCode {
    let yand_runs = catalog_runs();
    let all_runs = all_method_runs(yand_runs.clone());
    let results: Vec<(&str, Outcome)> = vec![
        ("quadratic one-step convergence", one_step_quadratics()),
        (
            "newton collinearity on random quadratics",
            newton_collinearity(),
        ),
        ("worked examples", worked_examples()),
        ("affine-scaling iteration table", affine_scaling_table()),
        ("inverse barrier", inverse_barrier()),
        ("rosenbrock", rosenbrock()),
        ("nonconvex catalog and symmetry trap", nonconvex()),
        (
            "slice-centroid equivalence and halving ratio",
            slice_equivalence(),
        ),
        ("slice-centroid counterexample ascent", counterexample()),
        ("angle identity", angle_identity(&yand_runs)),
        ("line-search contracts", line_search_contracts(&all_runs)),
        ("affine-scaling equivalence", affine_invariance()),
        ("derivative oracle", derivative_oracle()),
        ("local quadratic rate", local_quadratic_rate()),
        ("frame invariance", frame_invariance()),
        (
            "slice-centroid first-order error on a non-quadratic",
            slice_first_order_non_quadratic(),
        ),
    ];
    let mut failures = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {}", i + 1, o.detail);
        failures += usize::from(!o.passed);
    }
    println!("{} passed, {failures} failed", results.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
