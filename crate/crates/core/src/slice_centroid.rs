//! Planar slice-centroid estimate of the affine-normal direction.

use crate::direction::block_decompose;
use crate::error::{Result, YandError};
use crate::numerics::{build_normal_aligned_frame, classify_symmetric, RealVector};
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceParams {
    pub delta: f64,
    /// Half-width `R` of the scanned tangent window.
    pub window: f64,
    pub samples: usize,
    pub bisect_tol: f64,
}

pub const DEFAULT_SAMPLES: usize = 2048;
pub const DEFAULT_BISECT_TOL: f64 = 1e-12;
const CURVATURE_FLOOR: f64 = 1e-3;

impl SliceParams {
    /// Default parameters at `z`: window `10·√(2δ/λ̂)` with `λ̂` the smallest
    /// tangent curvature (floored at `1e−3`), and at least `1`.
    pub fn for_point(obj: &dyn Objective, z: &RealVector, delta: f64) -> Result<Self> {
        let block = block_decompose(obj, z)?;
        let min_eig = classify_symmetric(&block.b)
            .map(|c| c.min_eig)
            .unwrap_or(0.0);
        let lambda = if min_eig.is_finite() {
            min_eig.max(CURVATURE_FLOOR)
        } else {
            CURVATURE_FLOOR
        };
        Ok(SliceParams {
            delta,
            window: (10.0 * (2.0 * delta / lambda).sqrt()).max(1.0),
            samples: DEFAULT_SAMPLES,
            bisect_tol: DEFAULT_BISECT_TOL,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.window > 0.0 && self.bisect_tol > 0.0 && self.samples >= 64) {
            return Err(YandError::InvalidParameters(
                "slice: need delta, window, bisect_tol > 0 and samples >= 64".into(),
            ));
        }
        Ok(())
    }
}

/// Sublevel part `{f ≤ f(z)}` of a line parallel to the tangent at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRegion {
    pub intervals: Vec<(f64, f64)>,
    pub total_length: f64,
    pub centroid_param: f64,
}

/// Parameterization `x(t) = z + (C/‖∇f(z)‖)·n̂ + t·t̂` of a slice line.
#[derive(Debug, Clone)]
pub struct SliceLine {
    pub base: RealVector,
    pub tangent: RealVector,
    pub normal: RealVector,
}

impl SliceLine {
    pub fn new(obj: &dyn Objective, z: &RealVector, c: f64) -> Result<Self> {
        if z.len() != 2 || obj.dim() != 2 {
            return Err(YandError::UnsupportedDimension { dim: z.len() });
        }
        let frame = build_normal_aligned_frame(&obj.gradient(z))?;
        let normal = frame.normal();
        Ok(SliceLine {
            base: z + &normal * (c / frame.grad_norm()),
            tangent: frame.tangent(0),
            normal,
        })
    }

    pub fn point(&self, t: f64) -> RealVector {
        &self.base + &self.tangent * t
    }
}

/// Scans `[−R, R]` for the sublevel set of `f(z)` on the slice line at offset `c`.
pub fn slice_region_2d(
    obj: &dyn Objective,
    z: &RealVector,
    c: f64,
    params: &SliceParams,
) -> Result<SliceRegion> {
    params.validate()?;
    let line = SliceLine::new(obj, z, c)?;
    let level = obj.value(z);
    let inside = |t: f64| {
        let v = obj.value(&line.point(t));
        !v.is_nan() && v <= level
    };
    let crossing = |mut a: f64, mut b: f64| {
        // inside(a) != inside(b)
        let a_in = inside(a);
        while (b - a).abs() > params.bisect_tol {
            let m = 0.5 * (a + b);
            if m <= a.min(b) || m >= a.max(b) {
                break;
            }
            if inside(m) == a_in {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };

    let r = params.window;
    let n = params.samples;
    let grid = |i: usize| -r + 2.0 * r * i as f64 / (n - 1) as f64;
    let mut intervals = Vec::new();
    let mut prev_in = inside(grid(0));
    let mut start = if prev_in { Some(-r) } else { None };
    for i in 1..n {
        let t = grid(i);
        let now_in = inside(t);
        if now_in != prev_in {
            let edge = crossing(grid(i - 1), t);
            if now_in {
                start = Some(edge);
            } else if let Some(s) = start.take() {
                intervals.push((s, edge));
            }
        }
        prev_in = now_in;
    }
    if let Some(s) = start {
        intervals.push((s, r));
    }
    let total_length: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    if intervals.is_empty() || !(total_length > 0.0) {
        return Err(YandError::EmptySlice);
    }
    let centroid_param = intervals
        .iter()
        .map(|(a, b)| 0.5 * (a + b) * (b - a))
        .sum::<f64>()
        / total_length;
    Ok(SliceRegion {
        intervals,
        total_length,
        centroid_param,
    })
}

/// Ambient centroid `g(C)` of the slice at offset `c`.
pub fn slice_centroid_point(
    obj: &dyn Objective,
    z: &RealVector,
    c: f64,
    params: &SliceParams,
) -> Result<RealVector> {
    let region = slice_region_2d(obj, z, c, params)?;
    Ok(SliceLine::new(obj, z, c)?.point(region.centroid_param))
}

/// Direction `(g(−δ) − z)/δ` from `z` to the centroid of the slice pushed `δ`
/// into the sublevel set.
///
/// When its normal component is negative it is rescaled to `−1`, matching the
/// normalization of the analytic direction; otherwise it is returned as is.
pub fn slice_centroid_direction(
    obj: &dyn Objective,
    z: &RealVector,
    params: &SliceParams,
) -> Result<RealVector> {
    let g = slice_centroid_point(obj, z, -params.delta, params)?;
    let raw = (g - z) / params.delta;
    let normal = SliceLine::new(obj, z, 0.0)?.normal;
    let nu = raw.dot(&normal);
    Ok(if nu < 0.0 { raw / -nu } else { raw })
}
