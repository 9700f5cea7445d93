//! Step-size selection along a descent ray `φ(α) = f(x + α d)`.

use std::fmt;

use crate::error::{Result, YandError};
use crate::numerics::RealVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactParams {
    pub alpha_max: f64,
    pub tol: f64,
}

impl Default for ExactParams {
    fn default() -> Self {
        ExactParams {
            alpha_max: 10.0,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoParams {
    pub sigma: f64,
    pub beta: f64,
    pub alpha0: f64,
    pub use_bb: bool,
    pub alpha_min_bb: f64,
    pub alpha_max_bb: f64,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        ArmijoParams {
            sigma: 1e-4,
            beta: 0.5,
            alpha0: 1.0,
            use_bb: false,
            alpha_min_bb: 1e-8,
            alpha_max_bb: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha0: f64,
    pub alpha_max: f64,
    pub max_zoom: usize,
}

impl Default for WolfeParams {
    fn default() -> Self {
        WolfeParams {
            c1: 1e-4,
            c2: 0.9,
            alpha0: 1.0,
            alpha_max: 10.0,
            max_zoom: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineSearchSpec {
    Exact(ExactParams),
    Armijo(ArmijoParams),
    StrongWolfe(WolfeParams),
}

impl LineSearchSpec {
    pub fn exact() -> Self {
        LineSearchSpec::Exact(ExactParams::default())
    }

    pub fn armijo() -> Self {
        LineSearchSpec::Armijo(ArmijoParams::default())
    }

    pub fn strong_wolfe() -> Self {
        LineSearchSpec::StrongWolfe(WolfeParams::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            LineSearchSpec::Exact(_) => "exact",
            LineSearchSpec::Armijo(_) => "armijo",
            LineSearchSpec::StrongWolfe(_) => "wolfe",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(YandError::InvalidParameters(msg.to_string()));
        match *self {
            LineSearchSpec::Exact(p) => {
                if !(p.alpha_max > 0.0 && p.alpha_max.is_finite()) {
                    return bad("exact: alpha_max must be positive");
                }
                if !(p.tol > 0.0) {
                    return bad("exact: tol must be positive");
                }
            }
            LineSearchSpec::Armijo(p) => {
                if !(p.sigma > 0.0 && p.sigma < 1.0) {
                    return bad("armijo: sigma must lie in (0, 1)");
                }
                if !(p.beta > 0.0 && p.beta < 1.0) {
                    return bad("armijo: beta must lie in (0, 1)");
                }
                if !(p.alpha0 > 0.0 && p.alpha0.is_finite()) {
                    return bad("armijo: alpha0 must be positive");
                }
                if !(p.alpha_min_bb > 0.0 && p.alpha_min_bb <= p.alpha_max_bb) {
                    return bad("armijo: need 0 < alpha_min_bb <= alpha_max_bb");
                }
            }
            LineSearchSpec::StrongWolfe(p) => {
                if !(p.c1 > 0.0 && p.c1 < p.c2 && p.c2 < 1.0) {
                    return bad("wolfe: need 0 < c1 < c2 < 1");
                }
                if !(p.alpha0 > 0.0 && p.alpha0 <= p.alpha_max && p.alpha_max.is_finite()) {
                    return bad("wolfe: need 0 < alpha0 <= alpha_max");
                }
                if p.max_zoom == 0 {
                    return bad("wolfe: max_zoom must be positive");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for LineSearchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineSearchSpec::Exact(p) => {
                write!(f, "exact(alpha_max={}, tol={:e})", p.alpha_max, p.tol)
            }
            LineSearchSpec::Armijo(p) => write!(
                f,
                "armijo(sigma={:e}, beta={}, alpha0={}, bb={})",
                p.sigma, p.beta, p.alpha0, p.use_bb
            ),
            LineSearchSpec::StrongWolfe(p) => write!(
                f,
                "wolfe(c1={:e}, c2={}, alpha0={}, alpha_max={})",
                p.c1, p.c2, p.alpha0, p.alpha_max
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchStatus {
    Accepted,
    MaxBacktracks,
    ZoomFailed,
    /// The exact search found no point below `φ(0)`.
    NoDecrease,
}

impl fmt::Display for LineSearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LineSearchStatus::Accepted => "Accepted",
            LineSearchStatus::MaxBacktracks => "MaxBacktracks",
            LineSearchStatus::ZoomFailed => "ZoomFailed",
            LineSearchStatus::NoDecrease => "NoDecrease",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub f_new: f64,
    pub evals: usize,
    pub status: LineSearchStatus,
}

impl LineSearchResult {
    pub fn accepted(&self) -> bool {
        self.status == LineSearchStatus::Accepted
    }
}

/// Maximum number of backtracking reductions.
pub const MAX_BACKTRACKS: usize = 60;

const GOLDEN: f64 = 0.381_966_011_250_105_1;

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(f64) -> f64> Counted<F> {
    fn call(&mut self, a: f64) -> f64 {
        self.evals += 1;
        (self.f)(a)
    }
}

/// Golden-section minimization of `φ` on `[0, U]`, then a parabolic polish
/// through `α ± h` with `h = 1e−5·α`. The vertex is taken when the stencil
/// brackets a minimum or when it does not raise the value.
///
/// `U` starts at `alpha_max` and is halved until `φ(U)` is finite.
const POLISH_STEP: f64 = 1e-5;

pub fn exact_search<F>(phi: F, alpha_max: f64, tol: f64) -> Result<LineSearchResult>
where
    F: FnMut(f64) -> f64,
{
    if !(alpha_max > 0.0 && tol > 0.0) {
        return Err(YandError::InvalidParameters(
            "exact: alpha_max and tol must be positive".into(),
        ));
    }
    let mut phi = Counted { f: phi, evals: 0 };
    let phi0 = phi.call(0.0);
    if !phi0.is_finite() {
        return Err(YandError::NoFiniteStep { alpha_max });
    }
    let mut upper = alpha_max;
    let mut f_upper = phi.call(upper);
    while !f_upper.is_finite() {
        upper *= 0.5;
        if upper < f64::MIN_POSITIVE {
            return Err(YandError::NoFiniteStep { alpha_max });
        }
        f_upper = phi.call(upper);
    }

    let (mut a, mut b) = (0.0, upper);
    let mut x1 = a + GOLDEN * (b - a);
    let mut x2 = b - GOLDEN * (b - a);
    let mut f1 = phi.call(x1);
    let mut f2 = phi.call(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN * (b - a);
            f1 = phi.call(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN * (b - a);
            f2 = phi.call(x2);
        }
        if x2 <= x1 {
            break;
        }
    }

    let mut alpha = 0.5 * (a + b);
    let mut f_alpha = phi.call(alpha);
    let h = POLISH_STEP * alpha;
    if h > 0.0 {
        let (fl, fr) = (phi.call(alpha - h), phi.call(alpha + h));
        if let Some(vertex) = parabola_vertex((alpha - h, fl), (alpha, f_alpha), (alpha + h, fr)) {
            if vertex > 0.0 && vertex <= upper {
                let fv = phi.call(vertex);
                // both sides above the center: the vertex lies in (α − h, α + h)
                let resolved = fl > f_alpha && fr > f_alpha;
                if fv.is_finite() && (resolved || fv <= f_alpha) {
                    alpha = vertex;
                    f_alpha = fv;
                }
            }
        }
    }
    if upper <= alpha_max && f_upper < f_alpha && upper > 0.0 {
        alpha = upper;
        f_alpha = f_upper;
    }
    let status = if f_alpha.is_finite() && f_alpha < phi0 && alpha > 0.0 {
        LineSearchStatus::Accepted
    } else {
        LineSearchStatus::NoDecrease
    };
    Ok(LineSearchResult {
        alpha,
        f_new: f_alpha,
        evals: phi.evals,
        status,
    })
}

fn parabola_vertex(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> Option<f64> {
    let (x0, y0) = p;
    let (x1, y1) = q;
    let (x2, y2) = r;
    if ![y0, y1, y2].iter().all(|v| v.is_finite()) {
        return None;
    }
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let v = x1 - 0.5 * num / den;
    v.is_finite().then_some(v)
}

/// Backtracking `α = βᵐ α₀` until `φ(α) ≤ φ(0) + σ α φ'(0)` with `φ(α)` finite and below `φ(0)`.
pub fn armijo_backtrack<F>(phi: F, dphi0: f64, params: &ArmijoParams) -> Result<LineSearchResult>
where
    F: FnMut(f64) -> f64,
{
    if !(dphi0 < 0.0) {
        return Err(YandError::NotDescent { slope: dphi0 });
    }
    let mut phi = Counted { f: phi, evals: 0 };
    let phi0 = phi.call(0.0);
    let mut alpha = params.alpha0;
    let mut f_alpha = f64::INFINITY;
    for _ in 0..=MAX_BACKTRACKS {
        f_alpha = phi.call(alpha);
        if f_alpha.is_finite() && f_alpha < phi0 && f_alpha <= phi0 + params.sigma * alpha * dphi0 {
            return Ok(LineSearchResult {
                alpha,
                f_new: f_alpha,
                evals: phi.evals,
                status: LineSearchStatus::Accepted,
            });
        }
        alpha *= params.beta;
    }
    Ok(LineSearchResult {
        alpha: alpha / params.beta,
        f_new: f_alpha,
        evals: phi.evals,
        status: LineSearchStatus::MaxBacktracks,
    })
}

/// Bracketing followed by zoom until both strong-Wolfe conditions hold.
pub fn strong_wolfe_search<F, G>(phi: F, dphi: G, params: &WolfeParams) -> Result<LineSearchResult>
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64) -> f64,
{
    let mut phi = Counted { f: phi, evals: 0 };
    let mut dphi = Counted { f: dphi, evals: 0 };
    let phi0 = phi.call(0.0);
    let dphi0 = dphi.call(0.0);
    if !(dphi0 < 0.0) {
        return Err(YandError::NotDescent { slope: dphi0 });
    }
    let c1 = params.c1;
    let curvature_bound = -params.c2 * dphi0;
    let sufficient = |a: f64, fa: f64| fa.is_finite() && fa < phi0 && fa <= phi0 + c1 * a * dphi0;

    let finish = |alpha: f64, f_new: f64, status, evals: usize| LineSearchResult {
        alpha,
        f_new,
        evals,
        status,
    };

    let mut a_prev = 0.0;
    let mut f_prev = phi0;
    let mut d_prev = dphi0;
    let mut a = params.alpha0.min(params.alpha_max);
    let mut first = true;
    let (mut lo, mut f_lo, mut d_lo, mut hi, mut f_hi) = loop {
        let fa = phi.call(a);
        if !sufficient(a, fa) || (!first && fa >= f_prev) {
            break (a_prev, f_prev, d_prev, a, fa);
        }
        let da = dphi.call(a);
        if da.abs() <= curvature_bound {
            return Ok(finish(
                a,
                fa,
                LineSearchStatus::Accepted,
                phi.evals + dphi.evals,
            ));
        }
        if da >= 0.0 {
            break (a, fa, da, a_prev, f_prev);
        }
        if a >= params.alpha_max {
            return Ok(finish(
                a,
                fa,
                LineSearchStatus::ZoomFailed,
                phi.evals + dphi.evals,
            ));
        }
        a_prev = a;
        f_prev = fa;
        d_prev = da;
        a = (2.0 * a).min(params.alpha_max);
        first = false;
    };

    for _ in 0..params.max_zoom {
        let (left, right) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let width = right - left;
        let mut trial = 0.5 * (lo + hi);
        if f_hi.is_finite() {
            let span = hi - lo;
            let denom = 2.0 * (f_hi - f_lo - d_lo * span);
            if denom > 0.0 {
                let q = lo - d_lo * span * span / denom;
                if q > left + 0.1 * width && q < right - 0.1 * width {
                    trial = q;
                }
            }
        }
        let ft = phi.call(trial);
        if !sufficient(trial, ft) || ft >= f_lo {
            hi = trial;
            f_hi = ft;
        } else {
            let dt = dphi.call(trial);
            if dt.abs() <= curvature_bound {
                return Ok(finish(
                    trial,
                    ft,
                    LineSearchStatus::Accepted,
                    phi.evals + dphi.evals,
                ));
            }
            if dt * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = trial;
            f_lo = ft;
            d_lo = dt;
        }
        if (hi - lo).abs() <= f64::EPSILON * lo.abs().max(1e-300) {
            break;
        }
    }
    Ok(finish(
        lo,
        f_lo,
        LineSearchStatus::ZoomFailed,
        phi.evals + dphi.evals,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbVariant {
    BB1,
    BB2,
}

/// Barzilai–Borwein step from the previous displacement `s` and gradient change `y`.
pub fn bb_initial_step(
    s_prev: &RealVector,
    y_prev: &RealVector,
    variant: BbVariant,
    alpha_min_bb: f64,
    alpha_max_bb: f64,
) -> f64 {
    let sy = s_prev.dot(y_prev);
    if !(sy > 0.0) {
        return 1.0;
    }
    let raw = match variant {
        BbVariant::BB1 => s_prev.norm_squared() / sy,
        BbVariant::BB2 => sy / y_prev.norm_squared(),
    };
    if raw.is_nan() {
        return 1.0;
    }
    raw.clamp(alpha_min_bb, alpha_max_bb)
}

/// `φ(α) ≤ φ(0) + σ α φ'(0) + slack`.
pub fn armijo_holds(
    phi0: f64,
    dphi0: f64,
    alpha: f64,
    f_alpha: f64,
    sigma: f64,
    slack: f64,
) -> bool {
    f_alpha.is_finite() && f_alpha <= phi0 + sigma * alpha * dphi0 + slack
}

/// Both strong-Wolfe inequalities with an absolute slack.
#[allow(clippy::too_many_arguments)]
pub fn strong_wolfe_holds(
    phi0: f64,
    dphi0: f64,
    alpha: f64,
    f_alpha: f64,
    dphi_alpha: f64,
    c1: f64,
    c2: f64,
    slack: f64,
) -> bool {
    armijo_holds(phi0, dphi0, alpha, f_alpha, c1, slack)
        && dphi_alpha.abs() <= c2 * dphi0.abs() + slack
}
