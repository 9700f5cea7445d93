//! Test problem catalog with analytic derivatives, start points and reference optima.

use std::fmt;
use std::sync::Arc;

use crate::direction::newton_direction;
use crate::error::{Result, YandError};
use crate::numerics::{RealMatrix, RealVector};
use crate::objective::Objective;

/// `½ xᵀA x + bᵀx` with symmetric `A`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: RealMatrix,
    pub b: RealVector,
}

impl Quadratic {
    pub fn new(a: RealMatrix, b: RealVector) -> Self {
        assert_eq!(a.nrows(), b.len());
        Quadratic { a, b }
    }

    pub fn diagonal(diag: &[f64], b: &[f64]) -> Self {
        Quadratic::new(
            RealMatrix::from_diagonal(&RealVector::from_column_slice(diag)),
            RealVector::from_column_slice(b),
        )
    }

    /// `½‖x‖²` in `R^dim`.
    pub fn isotropic(dim: usize) -> Self {
        Quadratic::new(RealMatrix::identity(dim, dim), RealVector::zeros(dim))
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &RealVector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x)
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        &self.a * x + &self.b
    }
    fn hessian(&self, _x: &RealVector) -> RealMatrix {
        self.a.clone()
    }
    fn third_directional(
        &self,
        _: &RealVector,
        _: &RealVector,
        _: &RealVector,
        _: &RealVector,
    ) -> f64 {
        0.0
    }
}

/// Derivatives of a one-dimensional function at a point: `[f, f', f'', f''']`.
pub type Jet = [f64; 4];

/// `f(x) = Σ_i φ_i(x_i)`.
#[derive(Clone)]
pub struct Separable {
    terms: Vec<fn(f64) -> Jet>,
}

impl fmt::Debug for Separable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Separable")
            .field("dim", &self.terms.len())
            .finish()
    }
}

impl Separable {
    pub fn new(terms: Vec<fn(f64) -> Jet>) -> Self {
        Separable { terms }
    }

    fn jets<'a>(&'a self, x: &'a RealVector) -> impl Iterator<Item = Jet> + 'a {
        self.terms.iter().zip(x.iter()).map(|(t, &xi)| t(xi))
    }
}

impl Objective for Separable {
    fn dim(&self) -> usize {
        self.terms.len()
    }
    fn value(&self, x: &RealVector) -> f64 {
        self.jets(x).map(|j| j[0]).sum()
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        RealVector::from_iterator(self.dim(), self.jets(x).map(|j| j[1]))
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        RealMatrix::from_diagonal(&RealVector::from_iterator(
            self.dim(),
            self.jets(x).map(|j| j[2]),
        ))
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        self.jets(x)
            .enumerate()
            .map(|(i, j)| j[3] * u[i] * v[i] * w[i])
            .sum()
    }
}

/// `p(q(x)) + cᵀx` where `q(x) = ½ xᵀQx` is a quadratic form.
///
/// Chain rule: `∇f = p'·Qx + c`, `∇²f = p''·(Qx)(Qx)ᵀ + p'·Q`, and
/// `D³f[u,v,w] = p'''·(gu)(gv)(gw) + p''·((uQv)(gw) + (uQw)(gv) + (vQw)(gu))` with `g = Qx`.
#[derive(Debug, Clone)]
pub struct QuadraticComposite {
    pub form: RealMatrix,
    pub outer: fn(f64) -> Jet,
    pub linear: RealVector,
}

impl QuadraticComposite {
    fn parts(&self, x: &RealVector) -> (Jet, RealVector) {
        let qx = &self.form * x;
        let q = 0.5 * x.dot(&qx);
        ((self.outer)(q), qx)
    }
}

impl Objective for QuadraticComposite {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn value(&self, x: &RealVector) -> f64 {
        let (p, _) = self.parts(x);
        p[0] + self.linear.dot(x)
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        let (p, qx) = self.parts(x);
        qx * p[1] + &self.linear
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        let (p, qx) = self.parts(x);
        &qx * qx.transpose() * p[2] + &self.form * p[1]
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        let (p, qx) = self.parts(x);
        let (gu, gv, gw) = (qx.dot(u), qx.dot(v), qx.dot(w));
        let uqv = u.dot(&(&self.form * v));
        let uqw = u.dot(&(&self.form * w));
        let vqw = v.dot(&(&self.form * w));
        p[3] * gu * gv * gw + p[2] * (uqv * gw + uqw * gv + vqw * gu)
    }
}

/// `100 (x₂ − x₁²)² + (1 − x₁)²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rosenbrock;

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &RealVector) -> f64 {
        100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        let r = x[1] - x[0] * x[0];
        RealVector::from_column_slice(&[-400.0 * x[0] * r - 2.0 * (1.0 - x[0]), 200.0 * r])
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        let h11 = 1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0;
        let h12 = -400.0 * x[0];
        RealMatrix::from_row_slice(2, 2, &[h11, h12, h12, 200.0])
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        // only f_111 = 2400 x₁ and f_112 = −400 are nonzero
        2400.0 * x[0] * u[0] * v[0] * w[0]
            - 400.0 * (u[0] * v[0] * w[1] + u[0] * v[1] * w[0] + u[1] * v[0] * w[0])
    }
}

/// `½‖x‖² + μ / (d − x₁ − x₂)` on the half-plane `x₁ + x₂ < d`.
#[derive(Debug, Clone, Copy)]
pub struct InverseBarrier {
    pub mu: f64,
    pub offset: f64,
}

impl InverseBarrier {
    fn slack(&self, x: &RealVector) -> f64 {
        self.offset - x[0] - x[1]
    }
}

impl Objective for InverseBarrier {
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, x: &RealVector) -> bool {
        x[0] + x[1] < self.offset
    }
    fn value(&self, x: &RealVector) -> f64 {
        if !self.in_domain(x) {
            return f64::INFINITY;
        }
        0.5 * x.norm_squared() + self.mu / self.slack(x)
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        if !self.in_domain(x) {
            return RealVector::from_element(2, f64::NAN);
        }
        let r = self.slack(x);
        x.add_scalar(self.mu / (r * r))
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        if !self.in_domain(x) {
            return RealMatrix::from_element(2, 2, f64::NAN);
        }
        let r = self.slack(x);
        RealMatrix::identity(2, 2).add_scalar(2.0 * self.mu / (r * r * r))
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        if !self.in_domain(x) {
            return f64::NAN;
        }
        let r = self.slack(x);
        6.0 * self.mu / r.powi(4) * (u[0] + u[1]) * (v[0] + v[1]) * (w[0] + w[1])
    }
}

fn jet_quartic_well(t: f64) -> Jet {
    // (t² − 1)²
    let s = t * t - 1.0;
    [s * s, 4.0 * t * s, 12.0 * t * t - 4.0, 24.0 * t]
}

fn jet_saddle_x(t: f64) -> Jet {
    // t⁴ − t²
    [
        t.powi(4) - t * t,
        4.0 * t.powi(3) - 2.0 * t,
        12.0 * t * t - 2.0,
        24.0 * t,
    ]
}

fn jet_square(t: f64) -> Jet {
    [t * t, 2.0 * t, 2.0, 0.0]
}

fn jet_linear_shift(t: f64) -> Jet {
    // t − 1
    [t - 1.0, 1.0, 0.0, 0.0]
}

fn jet_convex_53_x(t: f64) -> Jet {
    // ½t² + t⁴/12
    [
        0.5 * t * t + t.powi(4) / 12.0,
        t + t.powi(3) / 3.0,
        1.0 + t * t,
        2.0 * t,
    ]
}

fn jet_convex_53_y(t: f64) -> Jet {
    // 2t²
    [2.0 * t * t, 4.0 * t, 4.0, 0.0]
}

fn jet_cube(q: f64) -> Jet {
    [q.powi(3), 3.0 * q * q, 6.0 * q, 6.0]
}

fn jet_ring(q: f64) -> Jet {
    // (q − 1)²
    [(q - 1.0).powi(2), 2.0 * (q - 1.0), 2.0, 0.0]
}

/// Sixth-degree anisotropic polynomial `(x₁² + 4x₂²)³ + 0.1‖x‖² + 0.01(x₁ + 2x₂)`.
#[derive(Debug, Clone)]
pub struct Poly6 {
    cubic: QuadraticComposite,
}

impl Default for Poly6 {
    fn default() -> Self {
        Poly6 {
            // q(x) = ½ xᵀ diag(2, 8) x = x₁² + 4x₂²
            cubic: QuadraticComposite {
                form: RealMatrix::from_diagonal(&RealVector::from_column_slice(&[2.0, 8.0])),
                outer: jet_cube,
                linear: RealVector::from_column_slice(&[0.01, 0.02]),
            },
        }
    }
}

impl Objective for Poly6 {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &RealVector) -> f64 {
        self.cubic.value(x) + 0.1 * x.norm_squared()
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        self.cubic.gradient(x) + x * 0.2
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        self.cubic.hessian(x) + RealMatrix::identity(2, 2) * 0.2
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        self.cubic.third_directional(x, u, v, w)
    }
}

/// `f(x) = φ(Bx)` for an invertible linear map `B`.
///
/// Derivatives follow from the chain rule: `∇f = Bᵀ∇φ(Bx)`, `∇²f = Bᵀ∇²φ(Bx)B`,
/// `D³f[u,v,w] = D³φ(Bx)[Bu,Bv,Bw]`.
#[derive(Clone)]
pub struct LinearlyTransformed {
    pub inner: Arc<dyn Objective>,
    pub map: RealMatrix,
}

impl fmt::Debug for LinearlyTransformed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearlyTransformed")
            .field("map", &self.map)
            .finish_non_exhaustive()
    }
}

impl Objective for LinearlyTransformed {
    fn dim(&self) -> usize {
        self.map.ncols()
    }
    fn in_domain(&self, x: &RealVector) -> bool {
        self.inner.in_domain(&(&self.map * x))
    }
    fn value(&self, x: &RealVector) -> f64 {
        self.inner.value(&(&self.map * x))
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        self.map.tr_mul(&self.inner.gradient(&(&self.map * x)))
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        let h = self.inner.hessian(&(&self.map * x));
        self.map.tr_mul(&(h * &self.map))
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        self.inner.third_directional(
            &(&self.map * x),
            &(&self.map * u),
            &(&self.map * v),
            &(&self.map * w),
        )
    }
}

/// A named objective with its start point and, when known, its optimum.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub objective: Arc<dyn Objective>,
    pub x0: RealVector,
    pub x_star: Option<RealVector>,
    pub f_star: Option<f64>,
    pub notes: String,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("x0", &self.x0.as_slice())
            .field(
                "x_star",
                &self.x_star.as_ref().map(|v| v.as_slice().to_vec()),
            )
            .field("f_star", &self.f_star)
            .finish()
    }
}

impl Problem {
    pub fn new(name: &str, objective: Arc<dyn Objective>, x0: &[f64], notes: &str) -> Self {
        let x0 = RealVector::from_column_slice(x0);
        assert!(
            objective.in_domain(&x0),
            "start point of {name} is infeasible"
        );
        Problem {
            name: name.to_string(),
            objective,
            x0,
            x_star: None,
            f_star: None,
            notes: notes.to_string(),
        }
    }

    /// Attaches a stationary reference point, checking `‖∇f(x*)‖ ≤ 1e−8`.
    pub fn with_optimum(mut self, x_star: RealVector) -> Self {
        let g = self.objective.gradient(&x_star).norm();
        assert!(
            g <= 1e-8,
            "{}: reference optimum has ‖∇f‖ = {g:e}",
            self.name
        );
        self.f_star = Some(self.objective.value(&x_star));
        self.x_star = Some(x_star);
        self
    }

    pub fn with_start(mut self, x0: RealVector) -> Self {
        assert!(self.objective.in_domain(&x0), "start point is infeasible");
        self.x0 = x0;
        self
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }
}

/// Names accepted by [`catalog`] (besides `affine_scaled:<gamma>`).
pub const CATALOG: &[&str] = &[
    "quad_well",
    "quad_51",
    "quad_52",
    "convex_53",
    "poly6",
    "inverse_barrier",
    "rosenbrock",
    "ring_tilted",
    "saddle_poly",
    "four_well",
    "counterexample",
    "strongly_convex_base",
];

/// Newton polish to `‖∇f‖ ≤ 1e−12` from an approximate stationary point.
fn polish_stationary(obj: &dyn Objective, mut x: RealVector) -> RealVector {
    for _ in 0..100 {
        let g = obj.gradient(&x);
        if g.norm() <= 1e-12 {
            break;
        }
        match newton_direction(obj, &x, false) {
            Ok(d) => x += d,
            Err(_) => break,
        }
    }
    x
}

/// Looks up a catalog problem by name.
pub fn catalog(name: &str) -> Result<Problem> {
    if let Some(gamma) = name.strip_prefix("affine_scaled:") {
        let gamma: f64 = gamma
            .parse()
            .map_err(|_| YandError::UnknownProblem(name.to_string()))?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(YandError::UnknownProblem(name.to_string()));
        }
        return Ok(make_affine_scaled(gamma).0);
    }
    let problem = match name {
        "quad_well" => {
            let q = Quadratic::diagonal(&[2.0, 8.0], &[0.1, 0.2]);
            Problem::new(name, Arc::new(q), &[1.0, 1.0], "well-conditioned quadratic")
                .with_optimum(RealVector::from_column_slice(&[-0.05, -0.025]))
        }
        "quad_51" => {
            let q = Quadratic::diagonal(&[1.0, 4.0], &[-1.0, -4.0]);
            Problem::new(
                name,
                Arc::new(q),
                &[2.0, 0.0],
                "two-variable worked example",
            )
            .with_optimum(RealVector::from_column_slice(&[1.0, 1.0]))
        }
        "quad_52" => {
            let q = Quadratic::diagonal(&[1.0, 4.0, 9.0], &[-1.0, 0.0, 0.0]);
            Problem::new(
                name,
                Arc::new(q),
                &[2.0, 0.0, 0.0],
                "three-variable worked example",
            )
            .with_optimum(RealVector::from_column_slice(&[1.0, 0.0, 0.0]))
        }
        "convex_53" => {
            let f = Separable::new(vec![jet_convex_53_x, jet_convex_53_y]);
            Problem::new(
                name,
                Arc::new(f),
                &[1.0, 1.0],
                "strictly convex non-quadratic worked example",
            )
            .with_optimum(RealVector::zeros(2))
        }
        "poly6" => {
            let f: Arc<dyn Objective> = Arc::new(Poly6::default());
            let x_star = polish_stationary(&*f, RealVector::zeros(2));
            Problem::new(
                name,
                f,
                &[0.5, -0.5],
                "sixth-degree anisotropic convex polynomial",
            )
            .with_optimum(x_star)
        }
        "inverse_barrier" => {
            let f = InverseBarrier {
                mu: 1.0,
                offset: 1.0,
            };
            let (x_star, _) = inverse_barrier_optimum();
            Problem::new(
                name,
                Arc::new(f),
                &[0.01, 0.98],
                "quadratic bowl plus inverse barrier",
            )
            .with_optimum(x_star)
        }
        "rosenbrock" => Problem::new(name, Arc::new(Rosenbrock), &[-1.2, 1.0], "curved valley")
            .with_optimum(RealVector::from_column_slice(&[1.0, 1.0])),
        "ring_tilted" => {
            // (‖x‖² − 1)² + 0.1 x₁ with q(x) = ½xᵀ(2I)x = ‖x‖²
            let f: Arc<dyn Objective> = Arc::new(QuadraticComposite {
                form: RealMatrix::identity(2, 2) * 2.0,
                outer: jet_ring,
                linear: RealVector::from_column_slice(&[0.1, 0.0]),
            });
            let x_star = polish_stationary(&*f, RealVector::from_column_slice(&[-1.01, 0.0]));
            Problem::new(name, f, &[0.0, 1.5], "tilted ring-shaped valley").with_optimum(x_star)
        }
        "saddle_poly" => {
            let f: Arc<dyn Objective> = Arc::new(Separable::new(vec![jet_saddle_x, jet_square]));
            let x_star = polish_stationary(
                &*f,
                RealVector::from_column_slice(&[std::f64::consts::FRAC_1_SQRT_2, 0.0]),
            );
            Problem::new(
                name,
                f,
                &[0.1, 0.2],
                "strict saddle at the origin, wells at (±2^{-1/2}, 0)",
            )
            .with_optimum(x_star)
        }
        "four_well" => Problem::new(
            name,
            Arc::new(Separable::new(vec![jet_quartic_well, jet_quartic_well])),
            &[0.1, -1.5],
            "four global minimizers at (±1, ±1)",
        )
        .with_optimum(RealVector::from_column_slice(&[1.0, -1.0])),
        "counterexample" => Problem::new(
            name,
            Arc::new(Separable::new(vec![jet_quartic_well, jet_linear_shift])),
            &[0.0, 0.0],
            "non-elliptic level set at the origin; unbounded below",
        ),
        "strongly_convex_base" => {
            let f = Separable::new(vec![jet_soft_quartic, jet_soft_quartic]);
            Problem::new(name, Arc::new(f), &[1.2, -0.8], "½‖y‖² + (y₁⁴ + y₂⁴)/12")
                .with_optimum(RealVector::zeros(2))
        }
        _ => return Err(YandError::UnknownProblem(name.to_string())),
    };
    Ok(problem)
}

fn jet_soft_quartic(t: f64) -> Jet {
    // ½t² + t⁴/12
    jet_convex_53_x(t)
}

/// The scaling `B_γ = diag(1, γ)` behind an affine-scaled quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineScalingSpec {
    pub gamma: f64,
    pub map: RealMatrix,
}

impl AffineScalingSpec {
    /// `κ(B_γ)`.
    pub fn kappa_map(&self) -> f64 {
        self.gamma.max(1.0 / self.gamma)
    }

    /// `κ(∇²f_γ) = κ(B_γᵀB_γ)`.
    pub fn kappa_hessian(&self) -> f64 {
        self.kappa_map().powi(2)
    }
}

/// `f_γ(x) = ½(x₁² + γ²x₂²) = φ(B_γ x)` with `φ = ½‖·‖²`, started at `(1, 1)`.
pub fn make_affine_scaled(gamma: f64) -> (Problem, AffineScalingSpec) {
    assert!(gamma > 0.0, "gamma must be positive");
    let q = Quadratic::diagonal(&[1.0, gamma * gamma], &[0.0, 0.0]);
    let problem = Problem::new(
        &format!("affine_scaled:{gamma}"),
        Arc::new(q),
        &[1.0, 1.0],
        "isotropic bowl under diag(1, γ) scaling",
    )
    .with_optimum(RealVector::zeros(2));
    let spec = AffineScalingSpec {
        gamma,
        map: RealMatrix::from_diagonal(&RealVector::from_column_slice(&[1.0, gamma])),
    };
    (problem, spec)
}

/// Closed-form minimizer of the inverse-barrier problem.
///
/// On the symmetry line `x₁ = x₂ = s/2` stationarity reduces to
/// `s(1 − s)² + 2 = 0`, whose real root is
/// `s* = 2/3 − ((3√87 + 28)^{1/3} + (3√87 + 28)^{−1/3}) / 3`.
pub fn inverse_barrier_optimum() -> (RealVector, f64) {
    let c = (3.0 * 87f64.sqrt() + 28.0).cbrt();
    let s = 2.0 / 3.0 - (c + 1.0 / c) / 3.0;
    let x = RealVector::from_column_slice(&[s / 2.0, s / 2.0]);
    let f = s * s / 4.0 + 1.0 / (1.0 - s);
    (x, f)
}
