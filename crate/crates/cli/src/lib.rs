//! Command-line harness for affine normal descent experiments.
//!
//! Exit codes: `0` success, `1` bad arguments or I/O failure, `2` iteration
//! cap reached, `3` line-search failure or degenerate stop, `4` a reproduction
//! or derivative check failed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use yand_core::config::{fmt_sig17, Config};
use yand_core::experiments::{
    invariance_sweep, table2, verification_points, worked_example_checks, INVARIANCE_HEADER,
    TABLE2_HEADER,
};
use yand_core::objective::{verify_derivatives, DerivativeReport};
use yand_core::optimizer::{
    gradient_descent_run, newton_run, yand_run_with, RunReport, RunStatus, StepRule,
};
use yand_core::problems::{catalog, Problem, CATALOG};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_ARGS: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_LINE_SEARCH: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "yand", version, about = "Affine normal descent experiments")]
pub struct Cli {
    /// Plain-text key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Stop once ‖∇f‖ falls below this
    #[arg(long = "tol-grad", global = true)]
    pub tol_grad: Option<f64>,
    /// Iteration cap
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Armijo sufficient-decrease constant
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Seed for sampled verification points
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method on one catalog problem and write its trajectory.
    Run {
        /// Catalog name, or `affine_scaled:<gamma>`.
        problem: String,
        /// yand | gd | newton | dnewton
        method: String,
        /// exact | armijo | wolfe | fixed:<alpha> | unit
        ls: String,
    },
    /// Iteration counts on the affine-scaled quadratic family.
    Table2,
    /// Worked-example and counterexample checks.
    Examples,
    /// Affine-scaling invariance runs on the strongly convex base problem.
    Invariance {
        #[arg(default_values_t = [1.0, 10.0, 1e2, 1e3, 1e4])]
        gammas: Vec<f64>,
    },
    /// Compare analytic derivatives of every catalog problem with finite differences.
    Verify {
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Yand,
    Gd,
    Newton,
    DampedNewton,
}

pub fn parse_method(s: &str) -> Result<MethodArg, String> {
    match s {
        "yand" => Ok(MethodArg::Yand),
        "gd" => Ok(MethodArg::Gd),
        "newton" => Ok(MethodArg::Newton),
        "dnewton" => Ok(MethodArg::DampedNewton),
        _ => Err(format!(
            "unknown method `{s}` (expected yand, gd, newton or dnewton)"
        )),
    }
}

pub fn parse_step_rule(s: &str, cfg: &Config) -> Result<StepRule, String> {
    match s {
        "exact" => Ok(StepRule::Search(cfg.exact())),
        "armijo" => Ok(StepRule::Search(cfg.armijo())),
        "wolfe" => Ok(StepRule::Search(cfg.wolfe())),
        "unit" => Ok(StepRule::Unit),
        _ => {
            let alpha = s
                .strip_prefix("fixed:")
                .and_then(|a| a.parse::<f64>().ok())
                .filter(|a| *a > 0.0 && a.is_finite())
                .ok_or_else(|| format!("unknown step rule `{s}` (expected exact, armijo, wolfe, fixed:<alpha> or unit)"))?;
            Ok(StepRule::Fixed(alpha))
        }
    }
}

fn build_config(cli: &Cli) -> Result<Config, String> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(|e| e.to_string())?,
        None => Config::default(),
    };
    if let Some(v) = cli.tol_grad {
        cfg.tol_grad = v;
    }
    if let Some(v) = cli.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = cli.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

pub fn status_exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Converged => EXIT_OK,
        RunStatus::MaxIterReached => EXIT_MAX_ITER,
        RunStatus::LineSearchFailure | RunStatus::DegenerateStop => EXIT_LINE_SEARCH,
    }
}

/// Trajectory CSV: `k,x1,...,xd,f,gnorm,alpha,case,T,cos_theta`.
pub fn trajectory_csv(report: &RunReport) -> String {
    let d = report.records.first().map_or(0, |r| r.x.len());
    let mut header = vec!["k".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend(["f", "gnorm", "alpha", "case", "T", "cos_theta"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for r in &report.records {
        let mut row = vec![r.k.to_string()];
        row.extend(r.x.iter().map(|&v| fmt_sig17(v)));
        row.push(fmt_sig17(r.f));
        row.push(fmt_sig17(r.grad_norm));
        row.push(fmt_sig17(r.alpha));
        row.push(r.case.map_or("none", |c| c.as_str()).to_string());
        row.push(fmt_sig17(r.t));
        row.push(fmt_sig17(r.cos_theta));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_line(report: &RunReport) -> String {
    let last = report.last();
    format!(
        "{} {} {} {}",
        report.status,
        report.iters,
        fmt_sig17(last.f),
        fmt_sig17(last.grad_norm)
    )
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

pub fn execute_run(
    problem: &Problem,
    method: MethodArg,
    rule: &StepRule,
    cfg: &Config,
) -> Result<RunReport, String> {
    let stop = cfg.stopping();
    Ok(match method {
        MethodArg::Yand => match rule {
            StepRule::Search(ls) => yand_run_with(problem, ls, &stop, &cfg.yand_options()),
            _ => return Err("yand needs a line search (exact, armijo or wolfe)".into()),
        },
        MethodArg::Gd => gradient_descent_run(problem, rule, &stop),
        MethodArg::Newton => newton_run(problem, false, rule, &stop),
        MethodArg::DampedNewton => newton_run(problem, true, rule, &stop),
    })
}

fn cmd_run(
    problem: &str,
    method: &str,
    ls: &str,
    cfg: &Config,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, String> {
    let problem = catalog(problem).map_err(|e| e.to_string())?;
    let method = parse_method(method)?;
    let rule = parse_step_rule(ls, cfg)?;
    let report = execute_run(&problem, method, &rule, cfg)?;
    emit(out, &trajectory_csv(&report), stdout).map_err(|e| e.to_string())?;
    writeln!(stdout, "{}", summary_line(&report)).map_err(|e| e.to_string())?;
    Ok(status_exit_code(report.status))
}

pub fn table2_csv(cfg: &Config) -> String {
    let mut out = format!("{TABLE2_HEADER}\n");
    for row in table2(cfg) {
        let mut cols = vec![
            fmt_sig17(row.gamma),
            fmt_sig17(row.kappa_b),
            fmt_sig17(row.kappa_h),
        ];
        cols.extend(row.cells().iter().map(|c| c.to_string()));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Renders the worked-example report and whether every gating check passed.
pub fn examples_report() -> Result<(String, bool), String> {
    let checks = worked_example_checks().map_err(|e| e.to_string())?;
    let mut out = String::new();
    let mut ok = true;
    for c in &checks {
        let tag = match (c.passed, c.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "NOTE",
        };
        ok &= c.passed || !c.gating;
        out.push_str(&format!(
            "{tag} {}: computed {}; expected {}\n",
            c.name, c.computed, c.expected
        ));
    }
    Ok((out, ok))
}

pub fn invariance_csv(gammas: &[f64], cfg: &Config) -> Result<String, String> {
    if gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err("gammas must be positive".into());
    }
    let mut out = format!("{INVARIANCE_HEADER}\n");
    for r in invariance_sweep(gammas, cfg).map_err(|e| e.to_string())? {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig17(r.gamma),
            fmt_sig17(r.max_deviation),
            r.iters_scaled,
            r.iters_base
        ));
    }
    Ok(out)
}

pub const VERIFY_HEADER: &str =
    "problem,points,max_rel_err_grad,max_rel_err_hess,max_rel_err_third,status";

/// Derivative report for the given problems and whether all passed.
pub fn verify_report(problems: &[Problem], points: usize, seed: u64) -> (String, bool) {
    let mut out = format!("{VERIFY_HEADER}\n");
    let mut ok = true;
    for (i, p) in problems.iter().enumerate() {
        let pts = verification_points(p, points, seed.wrapping_add(i as u64));
        let r = verify_derivatives(&*p.objective, &pts);
        let pass = r.passes(DerivativeReport::THRESHOLDS);
        ok &= pass;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.name,
            r.points_checked,
            fmt_sig17(r.max_rel_err_grad),
            fmt_sig17(r.max_rel_err_hess),
            fmt_sig17(r.max_rel_err_third),
            if pass { "pass" } else { "FAIL" }
        ));
    }
    (out, ok)
}

/// Writes the derivative report for `problems` and returns the exit code.
pub fn cmd_verify_with(
    problems: &[Problem],
    points: usize,
    seed: u64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, String> {
    let (text, ok) = verify_report(problems, points, seed);
    emit(out, &text, stdout).map_err(|e| e.to_string())?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, String> {
    let cfg = build_config(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run {
            problem,
            method,
            ls,
        } => cmd_run(problem, method, ls, &cfg, out, stdout),
        Command::Table2 => {
            emit(out, &table2_csv(&cfg), stdout).map_err(|e| e.to_string())?;
            Ok(EXIT_OK)
        }
        Command::Examples => {
            let (text, ok) = examples_report()?;
            emit(out, &text, stdout).map_err(|e| e.to_string())?;
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Invariance { gammas } => {
            emit(out, &invariance_csv(gammas, &cfg)?, stdout).map_err(|e| e.to_string())?;
            Ok(EXIT_OK)
        }
        Command::Verify { points } => {
            if *points == 0 {
                return Err("--points must be positive".into());
            }
            let problems: Vec<Problem> = CATALOG
                .iter()
                .map(|n| catalog(n).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            cmd_verify_with(&problems, *points, cfg.seed, out, stdout)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_BAD_ARGS
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_BAD_ARGS
        }
    }
}
