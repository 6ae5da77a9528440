use serde::Serialize;

use super::{PhaseState, SystemKind, SystemSpec, SINGULAR_AXIS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{dot, inv_pow_dot, mu_over_x};

/// Time derivative `(ẋ, ẏ)` in the same block layout as the state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Velocity {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

impl Velocity {
    pub fn scaled(&self, c: f64) -> Velocity {
        Velocity {
            dx: self.dx.iter().map(|v| v * c).collect(),
            dy: self.dy.iter().map(|v| v * c).collect(),
        }
    }
}

/// The complex flow is the real flow on `R^{2n+2}` with every axis doubled.
pub(crate) fn doubled(axes: &[f64]) -> Vec<f64> {
    [axes, axes].concat()
}

fn check_singular(mu: &[f64], x: &[f64]) -> Result<()> {
    for (k, (m, xk)) in mu.iter().zip(x).enumerate() {
        if *m != 0.0 && xk.abs() < SINGULAR_AXIS_TOL {
            return Err(Error::SingularAxis { index: k, value: *xk });
        }
    }
    Ok(())
}

fn multiplier_denominator(value: f64) -> Result<f64> {
    if value.abs() < 1e-14 || !value.is_finite() {
        Err(Error::MultiplierSingular { value })
    } else {
        Ok(value)
    }
}

/// Right-hand side for a constrained ellipsoid flow with multiplier
/// numerator `num`: `ẏ = -num/<A^-2 x,x> A^-1 x - grad`.
fn ellipsoid_rhs(axes: &[f64], x: &[f64], y: &[f64], num: f64, grad: &[f64]) -> Result<Velocity> {
    let w = multiplier_denominator(inv_pow_dot(axes, 2, x, x))?;
    let c = num / w;
    let dy = (0..x.len()).map(|k| -c * x[k] / axes[k] - grad[k]).collect();
    Ok(Velocity { dx: y.to_vec(), dy })
}

/// Right-hand side without the on-manifold precondition (used for the
/// internal stages of the integrator).
pub fn rhs_unchecked(sys: &SystemSpec, s: &PhaseState) -> Result<Velocity> {
    s.check_len(sys)?;
    let a = sys.axes();
    let (x, y) = (&s.x, &s.y);
    match sys.kind {
        SystemKind::Jacobi | SystemKind::JacobiRosochatius => {
            check_singular(&sys.mu, x)?;
            let m = mu_over_x(&sys.mu, x);
            let num = inv_pow_dot(a, 1, y, y) + inv_pow_dot(a, 1, &m, &m) - sys.sigma;
            let grad: Vec<f64> = (0..x.len())
                .map(|k| {
                    let ros = if sys.mu[k] != 0.0 { sys.mu[k] * sys.mu[k] / x[k].powi(3) } else { 0.0 };
                    sys.sigma * x[k] - ros
                })
                .collect();
            ellipsoid_rhs(a, x, y, num, &grad)
        }
        SystemKind::SeparableHierarchy => {
            check_singular(&sys.mu, x)?;
            let grad = sys.potential().gradient(a, x)?;
            let ax: Vec<f64> = x.iter().zip(a).map(|(xi, ai)| xi / ai).collect();
            let num = inv_pow_dot(a, 1, y, y) - dot(&grad, &ax);
            ellipsoid_rhs(a, x, y, num, &grad)
        }
        SystemKind::ComplexJacobi => {
            let b = doubled(a);
            let num = inv_pow_dot(&b, 1, y, y) - sys.sigma;
            let grad: Vec<f64> = x.iter().map(|v| sys.sigma * v).collect();
            ellipsoid_rhs(&b, x, y, num, &grad)
        }
        SystemKind::DoubleJacobi => {
            let (x, xi, y, eta) = s.split_double();
            let w = multiplier_denominator(inv_pow_dot(a, 2, x, xi))?;
            let c = (inv_pow_dot(a, 1, y, eta) - sys.sigma) / w;
            let n = a.len();
            let mut dy = vec![0.0; 2 * n];
            for k in 0..n {
                dy[k] = -c * x[k] / a[k] - sys.sigma * x[k];
                dy[n + k] = -c * xi[k] / a[k] - sys.sigma * xi[k];
            }
            Ok(Velocity { dx: s.y.clone(), dy })
        }
        SystemKind::FreeOscillator | SystemKind::FreeJR => {
            check_singular(&sys.mu, x)?;
            let dy = (0..x.len())
                .map(|k| {
                    let ros = if sys.mu[k] != 0.0 { sys.mu[k] * sys.mu[k] / x[k].powi(3) } else { 0.0 };
                    -sys.sigma * x[k] + ros
                })
                .collect();
            Ok(Velocity { dx: y.clone(), dy })
        }
    }
}

/// Constraint functions of the state's phase space: `(F_1, F_2)` on
/// `T*E^n`, `(G_1, G_2)` for the double flow, their Hermitian analogues for
/// the complex flow, and nothing for free space.
pub fn constraint_residuals(sys: &SystemSpec, s: &PhaseState) -> Result<Vec<f64>> {
    s.check_len(sys)?;
    let a = sys.axes();
    Ok(match sys.kind {
        k if k.is_real_ellipsoid() => {
            vec![inv_pow_dot(a, 1, &s.x, &s.x) - 1.0, inv_pow_dot(a, 1, &s.x, &s.y)]
        }
        SystemKind::ComplexJacobi => {
            let b = doubled(a);
            vec![inv_pow_dot(&b, 1, &s.x, &s.x) - 1.0, 2.0 * inv_pow_dot(&b, 1, &s.x, &s.y)]
        }
        SystemKind::DoubleJacobi => {
            let (x, xi, y, eta) = s.split_double();
            vec![inv_pow_dot(a, 1, x, xi) - 1.0, inv_pow_dot(a, 1, y, xi) + inv_pow_dot(a, 1, x, eta)]
        }
        _ => vec![],
    })
}

fn check_constraints(sys: &SystemSpec, s: &PhaseState) -> Result<()> {
    const NAMES: [&str; 2] = ["F1", "F2"];
    for (i, r) in constraint_residuals(sys, s)?.into_iter().enumerate() {
        if !(r.abs() <= sys.ctol) {
            return Err(Error::ConstraintViolation { name: NAMES[i], residual: r, tol: sys.ctol });
        }
    }
    Ok(())
}

/// Equations of motion of `sys` at an on-manifold state.
pub fn rhs(sys: &SystemSpec, s: &PhaseState) -> Result<Velocity> {
    s.check_len(sys)?;
    check_constraints(sys, s)?;
    rhs_unchecked(sys, s)
}

/// The double flow in the time `τ` with `dt = <A^-2 x, ξ> dτ`.
pub fn reparametrized_rhs(sys: &SystemSpec, s: &PhaseState) -> Result<Velocity> {
    if sys.kind != SystemKind::DoubleJacobi {
        return Err(Error::Unsupported("time reparametrization is defined for the double flow".into()));
    }
    s.check_len(sys)?;
    check_constraints(sys, s)?;
    let a = sys.axes();
    let (x, xi, y, eta) = s.split_double();
    let w = multiplier_denominator(inv_pow_dot(a, 2, x, xi))?;
    let c = sys.sigma - inv_pow_dot(a, 1, y, eta);
    let n = a.len();
    let mut dx = vec![0.0; 2 * n];
    let mut dy = vec![0.0; 2 * n];
    for k in 0..n {
        dx[k] = w * y[k];
        dx[n + k] = w * eta[k];
        dy[k] = c * x[k] / a[k] - sys.sigma * w * x[k];
        dy[n + k] = c * xi[k] / a[k] - sys.sigma * w * xi[k];
    }
    Ok(Velocity { dx, dy })
}

/// The Hamiltonian of each flow.
pub fn energy(sys: &SystemSpec, s: &PhaseState) -> Result<f64> {
    s.check_len(sys)?;
    let a = sys.axes();
    let ros = |x: &[f64]| -> f64 {
        sys.mu
            .iter()
            .zip(x)
            .filter(|(m, _)| **m != 0.0)
            .map(|(m, xi)| 0.5 * m * m / (xi * xi))
            .sum()
    };
    Ok(match sys.kind {
        SystemKind::SeparableHierarchy => 0.5 * dot(&s.y, &s.y) + sys.potential().value(a, &s.x)?,
        SystemKind::DoubleJacobi => {
            let (x, xi, y, eta) = s.split_double();
            0.5 * dot(y, eta) + 0.5 * sys.sigma * dot(x, xi)
        }
        _ => 0.5 * dot(&s.y, &s.y) + 0.5 * sys.sigma * dot(&s.x, &s.x) + ros(&s.x),
    })
}
