//! Lax representations with spectral parameter, their runtime
//! verification, spectral invariants and the conserved families.

mod commute;
mod integrals;
mod spectral;

pub use commute::{
    commutation_suite, listed_pairs, rank_dimensions, BracketRecord, CommutationPair, RankReport,
};
pub use integrals::{
    integral_family, integral_value, peta_residual, IntegralFamily, IntegralId, PairIntegral,
};
pub use spectral::{det_l, psi_poly, Psi};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, PhaseState, SystemKind, SystemSpec};
use crate::error::{Error, Result};
use crate::geometry::QuadricParam;
use crate::linalg::{inv_pow_dot, mu_over_x};
use crate::potentials::{delta_coefficients, eval_poly, hierarchy_eval, omega_coefficients, PotentialSpec};

pub type C = Complex64;

/// Tolerance on `<A^-1 x, η>`, `<A^-1 y, ξ>` for the big pair.
pub const INVARIANT_VARIETY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LaxSize {
    Small,
    Big,
}

/// The 2×2 pair
/// `L = [[q(x,η), q(y,η) + q(m,m) + Δ(λ)], [-1 - q(x,ξ), -q(y,ξ)]]`,
/// `A = [[0, (c/λ - Ω(λ))/w], [1, 0]]`, with `dL/dt = LA - AL`.
/// Every flow is encoded by choosing `(x, ξ, y, η, m, Δ, c, Ω, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxPair2 {
    pub axes: Vec<f64>,
    pub x: Vec<C>,
    pub xi: Vec<C>,
    pub y: Vec<C>,
    pub eta: Vec<C>,
    /// `μ/x` (zero where `μ = 0`).
    pub m: Vec<f64>,
    /// Ascending λ-coefficients of the polynomial part `Δ`.
    pub delta: Vec<f64>,
    /// Coefficient of `1/λ` in `w A_12`.
    pub c: C,
    /// Ascending λ-coefficients of `Ω` in `w A_12`.
    pub omega: Vec<C>,
    pub w: C,
}

fn q(lambda: f64, axes: &[f64], u: &[C], v: &[C]) -> C {
    crate::linalg::q_form_c(lambda, axes, u, v)
}

fn real_c(v: &[f64]) -> Vec<C> {
    v.iter().map(|x| C::new(*x, 0.0)).collect()
}

impl LaxPair2 {
    fn check_lambda(&self, lambda: f64) -> Result<()> {
        QuadricParam::new(lambda, &self.axes).map(|_| ())
    }

    pub fn l(&self, lambda: f64) -> Result<Matrix2<C>> {
        self.check_lambda(lambda)?;
        let a = &self.axes;
        let mm: f64 = self.m.iter().zip(a).map(|(m, ai)| m * m / (lambda - ai)).sum();
        let delta = eval_poly(&self.delta, lambda);
        Ok(Matrix2::new(
            q(lambda, a, &self.x, &self.eta),
            q(lambda, a, &self.y, &self.eta) + mm + delta,
            -1.0 - q(lambda, a, &self.x, &self.xi),
            -q(lambda, a, &self.y, &self.xi),
        ))
    }

    pub fn a(&self, lambda: f64) -> Result<Matrix2<C>> {
        if lambda == 0.0 && self.c != C::new(0.0, 0.0) {
            return Err(Error::Pole { value: 0.0, axis: 0.0 });
        }
        let pole = if self.c == C::new(0.0, 0.0) { C::new(0.0, 0.0) } else { self.c / lambda };
        let omega = self.omega.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * lambda + c);
        Ok(Matrix2::new(C::new(0.0, 0.0), (pole - omega) / self.w, C::new(1.0, 0.0), C::new(0.0, 0.0)))
    }

    pub fn det(&self, lambda: f64) -> Result<C> {
        Ok(self.l(lambda)?.determinant())
    }

    pub fn trace(&self, lambda: f64) -> Result<C> {
        Ok(self.l(lambda)?.trace())
    }
}

/// The `(n+1)×(n+1)` pair
/// `L* = λ(y⊗ξ - x⊗η) + y⊗η + σ x⊗ξ - σA - λ²A`,
/// `A* = (A^-1y⊗A^-1ξ - A^-1x⊗A^-1η + λA^-1)/<A^-2 x, ξ>`, with
/// `dL*/dt = A*L* - L*A*` and `(u⊗v)_ij = u_i v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxPairBig {
    pub axes: Vec<f64>,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
    pub eta: Vec<f64>,
    pub sigma: f64,
}

impl LaxPairBig {
    pub fn l(&self, lambda: f64) -> DMatrix<f64> {
        let n = self.axes.len();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { (self.sigma + lambda * lambda) * self.axes[i] } else { 0.0 };
            lambda * (self.y[i] * self.xi[j] - self.x[i] * self.eta[j]) + self.y[i] * self.eta[j]
                + self.sigma * self.x[i] * self.xi[j]
                - diag
        })
    }

    pub fn a(&self, lambda: f64) -> Result<DMatrix<f64>> {
        let a = &self.axes;
        let w = inv_pow_dot(a, 2, &self.x, &self.xi);
        if w.abs() < 1e-14 {
            return Err(Error::MultiplierSingular { value: w });
        }
        let n = a.len();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { lambda / a[i] } else { 0.0 };
            (self.y[i] * self.xi[j] / (a[i] * a[j]) - self.x[i] * self.eta[j] / (a[i] * a[j]) + diag) / w
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LaxPair {
    Small(LaxPair2),
    Big(LaxPairBig),
}

fn small_pair(sys: &SystemSpec, s: &PhaseState) -> Result<LaxPair2> {
    s.check_len(sys)?;
    let a = sys.axes().to_vec();
    let sigma = sys.sigma;
    let zero = C::new(0.0, 0.0);
    let symmetric = |x: &[f64], y: &[f64], m: Vec<f64>, delta: Vec<f64>, c: f64, omega: Vec<f64>, w: f64| LaxPair2 {
        axes: a.clone(),
        x: real_c(x),
        xi: real_c(x),
        y: real_c(y),
        eta: real_c(y),
        m,
        delta,
        c: C::new(c, 0.0),
        omega: real_c(&omega),
        w: C::new(w, 0.0),
    };
    Ok(match sys.kind {
        SystemKind::Jacobi | SystemKind::JacobiRosochatius => {
            let m = mu_over_x(&sys.mu, &s.x);
            let w = inv_pow_dot(&a, 2, &s.x, &s.x);
            let c = sigma - inv_pow_dot(&a, 1, &s.y, &s.y) - inv_pow_dot(&a, 1, &m, &m);
            symmetric(&s.x, &s.y, m, vec![sigma], c, vec![sigma * w], w)
        }
        SystemKind::SeparableHierarchy => {
            let m = mu_over_x(&sys.mu, &s.x);
            let w = inv_pow_dot(&a, 2, &s.x, &s.x);
            let mdeg = sys.sigmas.len();
            let tables = hierarchy_eval(&a, &s.x, mdeg)?;
            let mut delta = vec![0.0; mdeg];
            let mut omega = vec![0.0; mdeg];
            for (k, sk) in sys.sigmas.iter().enumerate() {
                for (i, d) in delta_coefficients(&tables, k + 1).into_iter().enumerate() {
                    delta[i] += sk * d;
                }
                for (i, o) in omega_coefficients(&a, &s.x, k + 1)?.into_iter().enumerate() {
                    omega[i] += sk * o * w;
                }
            }
            let plus = PotentialSpec { sigmas: sys.sigmas.clone(), mu: vec![0.0; a.len()] };
            let c = crate::potentials::gradient_pairing(&plus, &a, &s.x)?
                - inv_pow_dot(&a, 1, &s.y, &s.y)
                - inv_pow_dot(&a, 1, &m, &m);
            symmetric(&s.x, &s.y, m, delta, c, omega, w)
        }
        SystemKind::DoubleJacobi => {
            let (x, xi, y, eta) = s.split_double();
            let w = inv_pow_dot(&a, 2, x, xi);
            let c = sigma - inv_pow_dot(&a, 1, y, eta);
            LaxPair2 {
                axes: a.clone(),
                x: real_c(x),
                xi: real_c(xi),
                y: real_c(y),
                eta: real_c(eta),
                m: vec![0.0; a.len()],
                delta: vec![sigma],
                c: C::new(c, 0.0),
                omega: vec![C::new(sigma * w, 0.0)],
                w: C::new(w, 0.0),
            }
        }
        SystemKind::ComplexJacobi => {
            let (z, p) = s.split_complex();
            let zb: Vec<C> = z.iter().map(|v| v.conj()).collect();
            let pb: Vec<C> = p.iter().map(|v| v.conj()).collect();
            let w: C = z.iter().zip(&a).map(|(v, ai)| v * v.conj() / (ai * ai)).sum();
            let pp: C = p.iter().zip(&a).map(|(v, ai)| v * v.conj() / ai).sum();
            LaxPair2 {
                axes: a.clone(),
                x: z,
                xi: zb,
                y: p,
                eta: pb,
                m: vec![0.0; a.len()],
                delta: vec![sigma],
                c: C::new(sigma, 0.0) - pp,
                omega: vec![w * sigma],
                w,
            }
        }
        SystemKind::FreeOscillator | SystemKind::FreeJR => {
            let m = mu_over_x(&sys.mu, &s.x);
            LaxPair2 {
                axes: a.clone(),
                x: real_c(&s.x),
                xi: real_c(&s.x),
                y: real_c(&s.y),
                eta: real_c(&s.y),
                m,
                delta: vec![sigma],
                c: zero,
                omega: vec![C::new(sigma, 0.0)],
                w: C::new(1.0, 0.0),
            }
        }
    })
}

fn big_pair(sys: &SystemSpec, s: &PhaseState) -> Result<LaxPairBig> {
    s.check_len(sys)?;
    let a = sys.axes().to_vec();
    let (x, xi, y, eta) = match sys.kind {
        SystemKind::Jacobi => (s.x.clone(), s.x.clone(), s.y.clone(), s.y.clone()),
        SystemKind::DoubleJacobi => {
            let (x, xi, y, eta) = s.split_double();
            (x.to_vec(), xi.to_vec(), y.to_vec(), eta.to_vec())
        }
        k => {
            return Err(Error::Unsupported(format!(
                "the (n+1)x(n+1) pair is available for the Jacobi and double Jacobi flows, not {}",
                k.name()
            )))
        }
    };
    let r1 = inv_pow_dot(&a, 1, &x, &eta);
    let r2 = inv_pow_dot(&a, 1, &y, &xi);
    let residual = r1.abs().max(r2.abs());
    if residual > INVARIANT_VARIETY_TOL {
        return Err(Error::InvariantVariety { residual });
    }
    Ok(LaxPairBig { axes: a, x, xi, y, eta, sigma: sys.sigma })
}

pub fn build_lax(sys: &SystemSpec, s: &PhaseState, which: LaxSize) -> Result<LaxPair> {
    match which {
        LaxSize::Small => small_pair(sys, s).map(LaxPair::Small),
        LaxSize::Big => big_pair(sys, s).map(LaxPair::Big),
    }
}

/// `max |dL/dt - [·,·]|` with `dL/dt` a central difference over one
/// integrator step of size `h` in each direction.
pub fn lax_residual(sys: &SystemSpec, s: &PhaseState, which: LaxSize, lambda: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidSpec("h must be positive".into()));
    }
    let fwd = integrate(sys, s, h, h)?.pop().expect("nonempty trajectory");
    let bwd = integrate(sys, s, -h, h)?.pop().expect("nonempty trajectory");
    match which {
        LaxSize::Small => {
            let (p0, pf, pb) = (small_pair(sys, s)?, small_pair(sys, &fwd)?, small_pair(sys, &bwd)?);
            let dl = (pf.l(lambda)? - pb.l(lambda)?) / C::new(2.0 * h, 0.0);
            let (l, a) = (p0.l(lambda)?, p0.a(lambda)?);
            let r = dl - (l * a - a * l);
            Ok(r.iter().fold(0.0, |m, v| m.max(v.norm())))
        }
        LaxSize::Big => {
            let (p0, pf, pb) = (big_pair(sys, s)?, big_pair(sys, &fwd)?, big_pair(sys, &bwd)?);
            let dl = (pf.l(lambda) - pb.l(lambda)) / (2.0 * h);
            let (l, a) = (p0.l(lambda), p0.a(lambda)?);
            let r = dl - (&a * &l - &l * &a);
            Ok(r.amax())
        }
    }
}
