//! Objective functions with analytic derivatives up to third order, and a
//! central-difference oracle used to check them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, YandError};
use crate::numerics::{RealMatrix, RealVector};

/// Step for [`fd_gradient`] inside [`verify_derivatives`].
pub const FD_STEP_GRADIENT: f64 = 1e-5;
/// Step for [`fd_hessian`] inside [`verify_derivatives`].
pub const FD_STEP_HESSIAN: f64 = 1e-4;
/// Step for [`fd_third_directional`] inside [`verify_derivatives`].
pub const FD_STEP_THIRD: f64 = 1e-3;

/// A smooth objective on an open domain of `R^{n+1}`.
///
/// `value` returns `+∞` outside the domain so that line searches can reject
/// infeasible trial points. Derivatives are only meaningful inside the domain.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn in_domain(&self, _x: &RealVector) -> bool {
        true
    }

    fn value(&self, x: &RealVector) -> f64;

    fn gradient(&self, x: &RealVector) -> RealVector;

    fn hessian(&self, x: &RealVector) -> RealMatrix;

    /// The trilinear form `D³f(x)[u, v, w]`.
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn in_domain(&self, x: &RealVector) -> bool {
        (**self).in_domain(x)
    }
    fn value(&self, x: &RealVector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        (**self).hessian(x)
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        (**self).third_directional(x, u, v, w)
    }
}

impl<T: Objective + ?Sized> Objective for std::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn in_domain(&self, x: &RealVector) -> bool {
        (**self).in_domain(x)
    }
    fn value(&self, x: &RealVector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &RealVector) -> RealVector {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &RealVector) -> RealMatrix {
        (**self).hessian(x)
    }
    fn third_directional(
        &self,
        x: &RealVector,
        u: &RealVector,
        v: &RealVector,
        w: &RealVector,
    ) -> f64 {
        (**self).third_directional(x, u, v, w)
    }
}

fn feasible_value(obj: &dyn Objective, x: &RealVector) -> Result<f64> {
    if !obj.in_domain(x) {
        return Err(YandError::DomainViolation);
    }
    let v = obj.value(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(YandError::DomainViolation)
    }
}

fn unit(dim: usize, i: usize) -> RealVector {
    let mut e = RealVector::zeros(dim);
    e[i] = 1.0;
    e
}

/// Central-difference gradient `(f(x+h e_i) − f(x−h e_i)) / 2h`.
pub fn fd_gradient(obj: &dyn Objective, x: &RealVector, h: f64) -> Result<RealVector> {
    let n = obj.dim();
    let mut g = RealVector::zeros(n);
    for i in 0..n {
        let e = unit(n, i) * h;
        let fp = feasible_value(obj, &(x + &e))?;
        let fm = feasible_value(obj, &(x - &e))?;
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Second-order central stencil on function values, symmetrized.
pub fn fd_hessian(obj: &dyn Objective, x: &RealVector, h: f64) -> Result<RealMatrix> {
    let n = obj.dim();
    let mut hess = RealMatrix::zeros(n, n);
    let f0 = feasible_value(obj, x)?;
    for i in 0..n {
        let ei = unit(n, i) * h;
        let fp = feasible_value(obj, &(x + &ei))?;
        let fm = feasible_value(obj, &(x - &ei))?;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let ej = unit(n, j) * h;
            let fpp = feasible_value(obj, &(x + &ei + &ej))?;
            let fpm = feasible_value(obj, &(x + &ei - &ej))?;
            let fmp = feasible_value(obj, &(x - &ei + &ej))?;
            let fmm = feasible_value(obj, &(x - &ei - &ej))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// Central difference of the analytic Hessian quadratic form `uᵀ∇²f v` along `w`.
pub fn fd_third_directional(
    obj: &dyn Objective,
    x: &RealVector,
    u: &RealVector,
    v: &RealVector,
    w: &RealVector,
    h: f64,
) -> Result<f64> {
    let xp = x + w * h;
    let xm = x - w * h;
    feasible_value(obj, &xp)?;
    feasible_value(obj, &xm)?;
    let qp = u.dot(&(obj.hessian(&xp) * v));
    let qm = u.dot(&(obj.hessian(&xm) * v));
    Ok((qp - qm) / (2.0 * h))
}

/// Maximum relative errors of analytic derivatives against finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DerivativeReport {
    pub max_rel_err_grad: f64,
    pub max_rel_err_hess: f64,
    pub max_rel_err_third: f64,
    pub points_checked: usize,
}

impl DerivativeReport {
    /// Default acceptance thresholds for gradient, Hessian and third derivatives.
    pub const THRESHOLDS: (f64, f64, f64) = (1e-7, 1e-5, 1e-3);

    pub fn passes(&self, thresholds: (f64, f64, f64)) -> bool {
        self.max_rel_err_grad <= thresholds.0
            && self.max_rel_err_hess <= thresholds.1
            && self.max_rel_err_third <= thresholds.2
    }
}

/// `‖a − b‖_∞ / max(1, ‖a‖_∞)`.
fn rel_err_slice(analytic: &[f64], approx: &[f64]) -> f64 {
    let scale = analytic.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let diff = analytic
        .iter()
        .zip(approx)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if diff.is_nan() {
        f64::INFINITY
    } else {
        diff / scale
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> RealVector {
    loop {
        let v = RealVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

/// Compares analytic derivatives with central differences at each point, using
/// 10 random unit direction triples per point for the third-order form.
///
/// Points whose stencils leave the domain are reported as an infinite error.
pub fn verify_derivatives(obj: &dyn Objective, points: &[RealVector]) -> DerivativeReport {
    let mut report = DerivativeReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let n = obj.dim();
    for x in points {
        report.points_checked += 1;
        let grad = obj.gradient(x);
        let e_grad = match fd_gradient(obj, x, FD_STEP_GRADIENT) {
            Ok(fd) => rel_err_slice(grad.as_slice(), fd.as_slice()),
            Err(_) => f64::INFINITY,
        };
        let hess = obj.hessian(x);
        let e_hess = match fd_hessian(obj, x, FD_STEP_HESSIAN) {
            Ok(fd) => rel_err_slice(hess.as_slice(), fd.as_slice()),
            Err(_) => f64::INFINITY,
        };
        let mut analytic = Vec::with_capacity(10);
        let mut approx = Vec::with_capacity(10);
        let mut e_third = 0.0_f64;
        for _ in 0..10 {
            let (u, v, w) = (
                random_unit(&mut rng, n),
                random_unit(&mut rng, n),
                random_unit(&mut rng, n),
            );
            analytic.push(obj.third_directional(x, &u, &v, &w));
            match fd_third_directional(obj, x, &u, &v, &w, FD_STEP_THIRD) {
                Ok(fd) => approx.push(fd),
                Err(_) => e_third = f64::INFINITY,
            }
        }
        if approx.len() == analytic.len() {
            e_third = e_third.max(rel_err_slice(&analytic, &approx));
        }
        report.max_rel_err_grad = report.max_rel_err_grad.max(e_grad);
        report.max_rel_err_hess = report.max_rel_err_hess.max(e_hess);
        report.max_rel_err_third = report.max_rel_err_third.max(e_third);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{self, Quadratic};
    use nalgebra::dvector;

    #[test]
    fn fd_gradient_on_isotropic_quadratic() {
        let q = Quadratic::isotropic(2);
        let g = fd_gradient(&q, &dvector![1.0, 1.0], 1e-5).unwrap();
        assert!((g - dvector![1.0, 1.0]).amax() < 1e-9);
    }

    #[test]
    fn fd_gradient_matches_rosenbrock() {
        let p = problems::catalog("rosenbrock").unwrap();
        let x = dvector![-1.2, 1.0];
        let fd = fd_gradient(&*p.objective, &x, 1e-5).unwrap();
        let an = p.objective.gradient(&x);
        assert!((fd - &an).amax() / an.amax() < 1e-6);
    }

    #[test]
    fn fd_gradient_barrier_feasible_stencil() {
        let p = problems::catalog("inverse_barrier").unwrap();
        let g = fd_gradient(&*p.objective, &dvector![0.9, 0.0], 1e-6).unwrap();
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn fd_gradient_reports_domain_violation() {
        let p = problems::catalog("inverse_barrier").unwrap();
        let err = fd_gradient(&*p.objective, &dvector![0.5, 0.5 - 1e-7], 1e-6).unwrap_err();
        assert_eq!(err, YandError::DomainViolation);
    }

    #[test]
    fn fd_hessian_examples() {
        let well = problems::catalog("quad_well").unwrap();
        let h = fd_hessian(&*well.objective, &dvector![0.3, -0.7], 1e-4).unwrap();
        assert!((h - RealMatrix::from_diagonal(&dvector![2.0, 8.0])).amax() < 1e-6);

        let c53 = problems::catalog("convex_53").unwrap();
        let h = fd_hessian(&*c53.objective, &dvector![1.0, 1.0], 1e-4).unwrap();
        assert!((h - RealMatrix::from_diagonal(&dvector![2.0, 4.0])).amax() < 1e-5);

        let id = Quadratic::isotropic(3);
        let h = fd_hessian(&id, &dvector![0.2, 0.1, -0.4], 1e-4).unwrap();
        assert!((h - RealMatrix::identity(3, 3)).amax() < 1e-7);
    }

    #[test]
    fn fd_third_examples() {
        let q = problems::catalog("quad_51").unwrap();
        let (u, v, w) = (dvector![0.3, 0.1], dvector![-1.0, 2.0], dvector![0.5, 0.5]);
        let t = fd_third_directional(&*q.objective, &dvector![2.0, 0.0], &u, &v, &w, 1e-3).unwrap();
        assert!(t.abs() < 1e-6);

        let e1 = dvector![1.0, 0.0];
        let c53 = problems::catalog("convex_53").unwrap();
        let t = fd_third_directional(&*c53.objective, &dvector![1.0, 1.0], &e1, &e1, &e1, 1e-3)
            .unwrap();
        assert!((t - 2.0).abs() < 1e-4);

        let ce = problems::catalog("counterexample").unwrap();
        let t =
            fd_third_directional(&*ce.objective, &dvector![0.0, 0.0], &e1, &e1, &e1, 1e-3).unwrap();
        assert!(t.abs() < 1e-4);
    }

    #[test]
    fn verify_flags_corrupted_gradient() {
        struct Broken;
        impl Objective for Broken {
            fn dim(&self) -> usize {
                2
            }
            fn value(&self, x: &RealVector) -> f64 {
                0.5 * x.norm_squared()
            }
            fn gradient(&self, x: &RealVector) -> RealVector {
                x * 1.01
            }
            fn hessian(&self, _x: &RealVector) -> RealMatrix {
                RealMatrix::identity(2, 2)
            }
            fn third_directional(
                &self,
                _x: &RealVector,
                _u: &RealVector,
                _v: &RealVector,
                _w: &RealVector,
            ) -> f64 {
                0.0
            }
        }
        let report = verify_derivatives(&Broken, &[dvector![1.0, 2.0]]);
        assert!(report.max_rel_err_grad > 1e-3);
        assert!(report.max_rel_err_hess < 1e-5);
        assert!(!report.passes(DerivativeReport::THRESHOLDS));
    }
}
