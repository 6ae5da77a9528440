//! Billiards inside an ellipsoid with a harmonic force and Rosochatius
//! barriers: the explicit impact maps, an ODE-with-events oracle, the
//! discrete Lax check, caustics and Poncelet closure.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64 as C;
use serde::Serialize;

use crate::dynamics::{PhaseState, SystemSpec};
use crate::error::{check_len, Error, Result};
use crate::geometry::{tangency_value, EllipsoidSpec};
use crate::lax::psi_poly;
use crate::linalg::{dot, inv_pow_dot, q_form};

/// `|J| < GRAZING_TOL` rejects a step.
pub const GRAZING_TOL: f64 = 1e-8;
/// Lower bound for `ν² = σJ² + K²`.
pub const NU_SQ_TOL: f64 = 1e-14;
/// Imaginary residual allowed in the complex momentum formula.
pub const IMAG_TOL: f64 = 1e-8;
/// Impact points are projected onto the boundary to this accuracy.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Minimal `x_j` for a charged coordinate.
pub const AXIS_TOL: f64 = 1e-9;

/// Billiard inside `<x, a^{-1} x> <= 1` (restricted to `x_j >= 0` where
/// `μ_j ≠ 0`) with flight `ẍ = -σx + μ²/x³`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilliardSpec {
    pub axes: Vec<f64>,
    pub sigma: f64,
    pub mu: Vec<f64>,
    /// Energy margin required when `σ > 0`.
    pub epsilon: f64,
}

impl BilliardSpec {
    pub fn new(axes: Vec<f64>, sigma: f64, mu: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidSpec("axes must be nonempty".into()));
        }
        if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidSpec("axes must be positive".into()));
        }
        if !sigma.is_finite() {
            return Err(Error::InvalidSpec("sigma must be finite".into()));
        }
        let mu = if mu.is_empty() { vec![0.0; axes.len()] } else { mu };
        check_len(axes.len(), mu.len())?;
        if mu.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidSpec("Rosochatius constants must be nonnegative".into()));
        }
        Ok(BilliardSpec { axes, sigma, mu, epsilon: 1e-3 })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of charged coordinates.
    pub fn charged(&self) -> usize {
        self.mu.iter().filter(|m| **m != 0.0).count()
    }

    pub fn is_distinct(&self) -> bool {
        EllipsoidSpec::new(self.axes.clone()).map(|s| s.is_distinct()).unwrap_or(false)
    }

    /// The free flight between impacts.
    pub fn flight_system(&self) -> Result<SystemSpec> {
        SystemSpec::free_jr(EllipsoidSpec::new(self.axes.clone())?, self.sigma, self.mu.clone())
    }

    /// `<x, a^{-1} x> - 1`.
    pub fn boundary_value(&self, x: &[f64]) -> f64 {
        inv_pow_dot(&self.axes, 1, x, x) - 1.0
    }

    pub fn energy(&self, s: &ImpactState) -> f64 {
        let rosochatius: f64 = self.mu.iter().zip(&s.x).filter(|(m, _)| **m != 0.0).map(|(m, x)| m * m / (x * x)).sum();
        0.5 * dot(&s.y, &s.y) + 0.5 * self.sigma * dot(&s.x, &s.x) + 0.5 * rosochatius
    }

    /// `J = 2<x, a^{-1} y>`.
    pub fn joachimsthal(&self, s: &ImpactState) -> f64 {
        2.0 * inv_pow_dot(&self.axes, 1, &s.x, &s.y)
    }

    /// For `σ > 0` the energy must exceed the potential `σ<x,x>/2` at every
    /// boundary point by `ε`, so that every flight returns to the boundary.
    pub fn check_admissible(&self, s: &ImpactState) -> Result<()> {
        if self.sigma <= 0.0 {
            return Ok(());
        }
        let a_max = self.axes.iter().cloned().fold(0.0, f64::max);
        let margin = self.energy(s) - 0.5 * self.sigma * a_max;
        if margin > self.epsilon {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("energy margin {margin:e} does not exceed epsilon = {:e}", self.epsilon)))
        }
    }
}

/// Impact point with outgoing momentum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k: usize,
}

impl ImpactState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        ImpactState { x, y, k: 0 }
    }

    /// Check length, boundary membership, charged signs and transversality.
    pub fn validate(&self, spec: &BilliardSpec) -> Result<()> {
        check_len(spec.dim(), self.x.len())?;
        check_len(spec.dim(), self.y.len())?;
        let b = spec.boundary_value(&self.x);
        if b.abs() > BOUNDARY_TOL {
            return Err(Error::ConstraintViolation { name: "boundary", residual: b, tol: BOUNDARY_TOL });
        }
        for (j, (m, x)) in spec.mu.iter().zip(&self.x).enumerate() {
            if *m != 0.0 && *x < AXIS_TOL {
                return Err(Error::SingularAxis { index: j, value: *x });
            }
        }
        let jk = spec.joachimsthal(self);
        if jk.abs() < GRAZING_TOL {
            return Err(Error::GrazingOrSingular(format!("|J| = {:e}", jk.abs())));
        }
        Ok(())
    }

    pub fn max_diff(&self, other: &ImpactState) -> f64 {
        crate::linalg::max_abs_diff(&self.x, &other.x).max(crate::linalg::max_abs_diff(&self.y, &other.y))
    }
}

/// Scale `x` radially onto the boundary.
pub fn to_boundary(axes: &[f64], x: &[f64]) -> Vec<f64> {
    let r = inv_pow_dot(axes, 1, x, x).sqrt();
    x.iter().map(|v| v / r).collect()
}

fn nu_of(sigma: f64, j: f64, k: f64) -> Result<f64> {
    let nu2 = sigma * j * j + k * k;
    if nu2 <= NU_SQ_TOL {
        return Err(Error::GrazingOrSingular(format!("ν² = {nu2:e}")));
    }
    Ok(nu2.sqrt())
}

/// One step of the billiard inside `<a^{-1} z, z̄> = 1` in `C^n` with the
/// harmonic force `-σz`.
pub fn fedorov_step(axes: &[f64], sigma: f64, z: &[C], p: &[C]) -> Result<(Vec<C>, Vec<C>)> {
    check_len(axes.len(), z.len())?;
    check_len(axes.len(), p.len())?;
    let jk = 2.0 * z.iter().zip(p).zip(axes).map(|((zi, pi), a)| (zi * pi.conj()).re / a).sum::<f64>();
    if jk.abs() < GRAZING_TOL {
        return Err(Error::GrazingOrSingular(format!("|J| = {:e}", jk.abs())));
    }
    let kk = sigma - p.iter().zip(axes).map(|(v, a)| v.norm_sqr() / a).sum::<f64>();
    let nu = nu_of(sigma, jk, kk)?;
    let z1: Vec<C> = z.iter().zip(p).map(|(zi, pi)| -(zi * kk + pi * jk) / nu).collect();
    let pi_k = jk / z1.iter().zip(axes).map(|(v, a)| v.norm_sqr() / (a * a)).sum::<f64>();
    let p1: Vec<C> = (0..axes.len())
        .map(|i| {
            let ai = axes[i];
            -((p[i] + z[i] * (pi_k / ai)) * kk + (p[i] * (pi_k / ai) - z[i] * sigma) * jk) / nu
        })
        .collect();
    Ok((z1, p1))
}

/// Scalars of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepScalars {
    pub j: f64,
    pub k: f64,
    pub nu: f64,
    pub pi: f64,
}

fn charged_ratio(mu: f64, x: f64) -> f64 {
    if mu == 0.0 {
        0.0
    } else {
        mu / x
    }
}

/// The Jacobi-Rosochatius billiard map, returning the scalars used.
pub fn jr_step_detailed(spec: &BilliardSpec, s: &ImpactState) -> Result<(ImpactState, StepScalars)> {
    check_len(spec.dim(), s.x.len())?;
    check_len(spec.dim(), s.y.len())?;
    let (a, sigma) = (&spec.axes, spec.sigma);
    for (j, (m, x)) in spec.mu.iter().zip(&s.x).enumerate() {
        if *m != 0.0 && *x < AXIS_TOL {
            return Err(Error::SingularAxis { index: j, value: *x });
        }
    }
    let jk = spec.joachimsthal(s);
    if jk.abs() < GRAZING_TOL {
        return Err(Error::GrazingOrSingular(format!("|J| = {:e}", jk.abs())));
    }
    let m: Vec<f64> = spec.mu.iter().zip(&s.x).map(|(mu, x)| charged_ratio(*mu, *x)).collect();
    let kk = sigma - inv_pow_dot(a, 1, &s.y, &s.y) - inv_pow_dot(a, 1, &m, &m);
    let nu = nu_of(sigma, jk, kk)?;
    let n = spec.dim();
    let mut x1 = vec![0.0; n];
    let mut phase = vec![C::new(1.0, 0.0); n];
    for j in 0..n {
        let lin = kk * s.x[j] + jk * s.y[j];
        if spec.mu[j] != 0.0 {
            // |-(K x + J y + i J μ/x)| / ν: the modulus of the complex image
            let c = C::new(-lin, -jk * m[j]);
            x1[j] = c.norm() / nu;
            phase[j] = C::from_polar(1.0, -c.arg());
            if x1[j] < AXIS_TOL {
                return Err(Error::SingularAxis { index: j, value: x1[j] });
            }
        } else {
            x1[j] = -lin / nu;
        }
    }
    let pi_k = jk / inv_pow_dot(a, 2, &x1, &x1);
    let mut y1 = vec![0.0; n];
    for j in 0..n {
        let (xj, yj, aj) = (s.x[j], s.y[j], a[j]);
        let first = C::new(pi_k / aj * xj + yj, m[j]) * kk;
        let second = C::new(pi_k / aj * yj - sigma * xj, pi_k * m[j] / aj) * jk;
        let mut v = -phase[j] * (first + second) / nu;
        if spec.mu[j] != 0.0 {
            v -= C::new(0.0, spec.mu[j] / x1[j]);
        }
        let scale = 1.0 + v.re.abs();
        if v.im.abs() > IMAG_TOL * scale {
            return Err(Error::FormulaConsistency { index: j, residual: v.im.abs() });
        }
        y1[j] = v.re;
    }
    let x1 = to_boundary(a, &x1);
    Ok((ImpactState { x: x1, y: y1, k: s.k + 1 }, StepScalars { j: jk, k: kk, nu, pi: pi_k }))
}

pub fn jr_step(spec: &BilliardSpec, s: &ImpactState) -> Result<ImpactState> {
    jr_step_detailed(spec, s).map(|(out, _)| out)
}

/// Settings of the ODE oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Nominal step; events are bracketed with steps of `h/4`.
    pub h: f64,
    /// Bisection tolerance on the event time.
    pub time_tol: f64,
    pub t_max: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { h: 4e-3, time_tol: 1e-12, t_max: 1e3 }
    }
}

fn flight_rhs(spec: &BilliardSpec, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let dy = x
        .iter()
        .zip(&spec.mu)
        .map(|(xi, m)| -spec.sigma * xi + if *m == 0.0 { 0.0 } else { m * m / (xi * xi * xi) })
        .collect();
    (y.to_vec(), dy)
}

fn flight_rk4(spec: &BilliardSpec, x: &[f64], y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let axpy = |u: &[f64], v: &[f64], c: f64| -> Vec<f64> { u.iter().zip(v).map(|(a, b)| a + c * b).collect() };
    let (k1x, k1y) = flight_rhs(spec, x, y);
    let (k2x, k2y) = flight_rhs(spec, &axpy(x, &k1x, h / 2.0), &axpy(y, &k1y, h / 2.0));
    let (k3x, k3y) = flight_rhs(spec, &axpy(x, &k2x, h / 2.0), &axpy(y, &k2y, h / 2.0));
    let (k4x, k4y) = flight_rhs(spec, &axpy(x, &k3x, h), &axpy(y, &k3y, h));
    let comb = |u: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..u.len()).map(|i| u[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])).collect()
    };
    (comb(x, &k1x, &k2x, &k3x, &k4x), comb(y, &k1y, &k2y, &k3y, &k4y))
}

/// Reflect `y` about the tangent plane at `x`: `y - 2(<y,n>/<n,n>) n`, `n = a^{-1}x`.
pub fn reflect(axes: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
    let n: Vec<f64> = x.iter().zip(axes).map(|(v, a)| v / a).collect();
    let c = 2.0 * dot(y, &n) / dot(&n, &n);
    y.iter().zip(&n).map(|(u, v)| u - c * v).collect()
}

/// Independent oracle: integrate the flight, locate the next boundary
/// crossing by step scanning and bisection in time, and reflect.
pub fn oracle_step_with(spec: &BilliardSpec, s: &ImpactState, opts: OracleOptions) -> Result<ImpactState> {
    s.validate(spec)?;
    if spec.joachimsthal(s) > 0.0 {
        return Err(Error::GrazingOrSingular("outgoing momentum points outside the domain".into()));
    }
    let he = opts.h / 4.0;
    let (mut x, mut y) = (s.x.clone(), s.y.clone());
    let mut t = 0.0;
    let mut inside = false;
    loop {
        if t > opts.t_max {
            return Err(Error::Escape { t_max: opts.t_max });
        }
        let (x2, y2) = flight_rk4(spec, &x, &y, he);
        let b = spec.boundary_value(&x2);
        if b < 0.0 {
            inside = true;
        } else if inside {
            break;
        }
        if !inside && t > 100.0 * he {
            return Err(Error::GrazingOrSingular("flight does not enter the domain".into()));
        }
        x = x2;
        y = y2;
        t += he;
    }
    let (mut lo, mut hi) = (0.0, he);
    while hi - lo > opts.time_tol {
        let mid = 0.5 * (lo + hi);
        let (xm, _) = flight_rk4(spec, &x, &y, mid);
        if spec.boundary_value(&xm) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (xe, ye) = flight_rk4(spec, &x, &y, 0.5 * (lo + hi));
    let xe = to_boundary(&spec.axes, &xe);
    let y1 = reflect(&spec.axes, &xe, &ye);
    Ok(ImpactState { x: xe, y: y1, k: s.k + 1 })
}

pub fn oracle_step(spec: &BilliardSpec, s: &ImpactState) -> Result<ImpactState> {
    oracle_step_with(spec, s, OracleOptions::default())
}

/// `L(λ)` at an impact state: `Q_λ(u,v) = Σ u_i v_i/(λ - a_i)`.
pub fn impact_lax_l(spec: &BilliardSpec, x: &[f64], y: &[f64], lambda: f64) -> Result<Matrix2<f64>> {
    crate::geometry::QuadricParam::new(lambda, &spec.axes)?;
    let a = &spec.axes;
    let m: Vec<f64> = spec.mu.iter().zip(x).map(|(mu, xi)| charged_ratio(*mu, *xi)).collect();
    let qxy = q_form(lambda, a, x, y);
    Ok(Matrix2::new(
        qxy,
        q_form(lambda, a, y, y) + q_form(lambda, a, &m, &m) + spec.sigma,
        -1.0 - q_form(lambda, a, x, x),
        -qxy,
    ))
}

/// `A_k(λ) = [[Kλ + Jπ, σJλ - Kπ], [-Jλ, Kλ]]`, with `det A_k = ν²λ²`.
pub fn impact_lax_a(sc: &StepScalars, sigma: f64, lambda: f64) -> Matrix2<f64> {
    Matrix2::new(
        sc.k * lambda + sc.j * sc.pi,
        sigma * sc.j * lambda - sc.k * sc.pi,
        -sc.j * lambda,
        sc.k * lambda,
    )
}

/// Outcome of the discrete Lax check for one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaxReport {
    /// `max_λ |det L_{k+1} - det L_k| / (1 + |det L_k|)`.
    pub det_drift: f64,
    /// `max_λ ‖L_{k+1} A_k - A_k L_k‖` under the best allowed reflection.
    pub conjugation_residual: f64,
    /// Signs applied to `(x_{k+1,j}, y_{k+1,j})`.
    pub signs: Vec<i8>,
}

const MAX_SIGN_SEARCH: usize = 12;

/// Check `L_{k+1} = A_k L_k A_k^{-1}` for the step `s -> next`.
pub fn discrete_lax_check(
    spec: &BilliardSpec,
    s: &ImpactState,
    next: &ImpactState,
    lambdas: &[f64],
) -> Result<DiscreteLaxReport> {
    if !spec.is_distinct() {
        return Err(Error::SymmetricSpec);
    }
    let jk = spec.joachimsthal(s);
    let m: Vec<f64> = spec.mu.iter().zip(&s.x).map(|(mu, x)| charged_ratio(*mu, *x)).collect();
    let kk = spec.sigma - inv_pow_dot(&spec.axes, 1, &s.y, &s.y) - inv_pow_dot(&spec.axes, 1, &m, &m);
    let nu = nu_of(spec.sigma, jk, kk)?;
    let pi = jk / inv_pow_dot(&spec.axes, 2, &next.x, &next.x);
    let sc = StepScalars { j: jk, k: kk, nu, pi };
    let mut det_drift: f64 = 0.0;
    let mut l0 = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        if lam.abs() < 1e-12 {
            return Err(Error::Pole { value: lam, axis: 0.0 });
        }
        let (a, b) = (impact_lax_l(spec, &s.x, &s.y, lam)?, impact_lax_l(spec, &next.x, &next.y, lam)?);
        let (d0, d1) = (a.determinant(), b.determinant());
        det_drift = det_drift.max((d1 - d0).abs() / (1.0 + d0.abs()));
        l0.push((lam, a, impact_lax_a(&sc, spec.sigma, lam)));
    }
    let free: Vec<usize> = (0..spec.dim()).filter(|&j| spec.mu[j] == 0.0).collect();
    let patterns: u64 = if free.len() <= MAX_SIGN_SEARCH { 1 << free.len() } else { 1 };
    let mut best = (f64::INFINITY, vec![1i8; spec.dim()]);
    for bits in 0..patterns {
        let mut signs = vec![1i8; spec.dim()];
        for (b, &j) in free.iter().enumerate() {
            if bits >> b & 1 == 1 {
                signs[j] = -1;
            }
        }
        let x1: Vec<f64> = next.x.iter().zip(&signs).map(|(v, s)| v * f64::from(*s)).collect();
        let y1: Vec<f64> = next.y.iter().zip(&signs).map(|(v, s)| v * f64::from(*s)).collect();
        let mut worst: f64 = 0.0;
        for (lam, l, a) in &l0 {
            let l1 = impact_lax_l(spec, &x1, &y1, *lam)?;
            worst = worst.max((l1 * a - a * l).amax());
        }
        if worst < best.0 {
            best = (worst, signs);
        }
    }
    Ok(DiscreteLaxReport { det_drift, conjugation_residual: best.0, signs: best.1 })
}

/// Five sample abscissae away from `0` and from every axis.
pub fn default_lambdas(axes: &[f64]) -> Vec<f64> {
    let mut sorted = axes.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    let top = sorted[sorted.len() - 1];
    let mut out = vec![-1.7, -0.45];
    out.extend(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    out.push(0.5 * sorted[0]);
    out.push(top + 1.3);
    out.push(top + 3.1);
    out.retain(|l| l.abs() > 1e-3 && axes.iter().all(|a| (l - a).abs() > 1e-3));
    out.truncate(5);
    out
}

/// A computed orbit: impacts, caustic parameters per segment and discrete
/// Lax diagnostics per step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilliardOrbit {
    pub impacts: Vec<ImpactState>,
    /// Real zeros of `Ψ` along each segment `impacts[k] -> impacts[k+1]`.
    pub caustics: Vec<Vec<f64>>,
    pub lax: Vec<DiscreteLaxReport>,
    pub lambdas: Vec<f64>,
}

/// Real zeros of `Ψ(λ) = Π(λ - a_i)^{δ_i} det L(λ)` at an impact state.
pub fn caustic_parameters(spec: &BilliardSpec, s: &ImpactState) -> Result<Vec<f64>> {
    let sys = spec.flight_system()?;
    psi_poly(&sys, &PhaseState::new(s.x.clone(), s.y.clone()))?.real_roots()
}

/// Iterate `jr_step` for `bounces` steps; errors carry the bounce index.
pub fn run_orbit(spec: &BilliardSpec, s0: &ImpactState, bounces: usize) -> Result<BilliardOrbit> {
    let at = |index: usize| move |e: Error| Error::Bounce { index, source: Box::new(e) };
    s0.validate(spec).map_err(at(0))?;
    spec.check_admissible(s0).map_err(at(0))?;
    let lambdas = default_lambdas(&spec.axes);
    let distinct = spec.is_distinct();
    let mut orbit = BilliardOrbit { impacts: vec![s0.clone()], caustics: vec![], lax: vec![], lambdas: lambdas.clone() };
    let mut s = s0.clone();
    for k in 0..bounces {
        let next = jr_step(spec, &s).map_err(at(k))?;
        if distinct {
            orbit.caustics.push(caustic_parameters(spec, &s).map_err(at(k))?);
            orbit.lax.push(discrete_lax_check(spec, &s, &next, &lambdas).map_err(at(k))?);
        }
        orbit.impacts.push(next.clone());
        s = next;
    }
    log::debug!("billiard orbit with {bounces} bounces");
    Ok(orbit)
}

/// Compare the explicit map with the oracle bounce by bounce, restarting
/// each bounce from the oracle's state. Returns the per-bounce deviations.
pub fn map_vs_oracle(spec: &BilliardSpec, s0: &ImpactState, bounces: usize) -> Result<Vec<f64>> {
    let mut s = s0.clone();
    let mut out = Vec::with_capacity(bounces);
    for k in 0..bounces {
        let wrap = |e: Error| Error::Bounce { index: k, source: Box::new(e) };
        let a = jr_step(spec, &s).map_err(wrap)?;
        let b = oracle_step(spec, &s).map_err(wrap)?;
        out.push(a.max_diff(&b));
        s = b;
    }
    Ok(out)
}

/// Chasles report: caustic parameters and their persistence along an orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausticReport {
    pub eta: Vec<f64>,
    pub expected_count: usize,
    /// Segments whose root count differs from the expected count.
    pub count_mismatches: usize,
    /// `max |η_l(k) - η_l(0)|` over segments with matching counts.
    pub max_drift: f64,
    /// For `σ = 0, μ = 0`: max `|tangency_value|` over segments and roots.
    pub tangency_max: Option<f64>,
}

impl CausticReport {
    pub fn count_ok(&self) -> bool {
        self.count_mismatches == 0 && self.eta.len() == self.expected_count
    }
}

/// Expected number of caustics: `n + d` for `σ ≠ 0`, `n - 1 + d` for `σ = 0`.
pub fn expected_caustics(spec: &BilliardSpec) -> usize {
    spec.dim() + spec.charged() - usize::from(spec.sigma == 0.0)
}

pub fn orbit_caustics(spec: &BilliardSpec, orbit: &BilliardOrbit) -> Result<CausticReport> {
    if !spec.is_distinct() {
        return Err(Error::SymmetricSpec);
    }
    let segments: Vec<Vec<f64>> = if orbit.caustics.len() + 1 == orbit.impacts.len() {
        orbit.caustics.clone()
    } else {
        orbit.impacts[..orbit.impacts.len().saturating_sub(1)]
            .iter()
            .map(|s| caustic_parameters(spec, s))
            .collect::<Result<_>>()?
    };
    let eta = segments.first().cloned().unwrap_or_default();
    let expected_count = expected_caustics(spec);
    let mut count_mismatches = 0;
    let mut max_drift: f64 = 0.0;
    for seg in &segments {
        if seg.len() != expected_count || seg.len() != eta.len() {
            count_mismatches += 1;
            continue;
        }
        for (a, b) in seg.iter().zip(&eta) {
            max_drift = max_drift.max((a - b).abs());
        }
    }
    let tangency_max = if spec.sigma == 0.0 && spec.charged() == 0 {
        let mut worst: f64 = 0.0;
        for s in &orbit.impacts[..orbit.impacts.len().saturating_sub(1)] {
            // a caustic at an axis value is a degenerate (focal) conic with no tangency form
            for e in eta.iter().filter(|e| spec.axes.iter().all(|a| (*e - a).abs() > 1e-9 * (1.0 + a.abs()))) {
                worst = worst.max(tangency_value(&spec.axes, &s.x, &s.y, *e, 0.0)?.abs());
            }
        }
        Some(worst)
    } else {
        None
    };
    Ok(CausticReport { eta, expected_count, count_mismatches, max_drift, tangency_max })
}

fn require_planar_free(spec: &BilliardSpec) -> Result<()> {
    if spec.dim() != 2 || spec.sigma != 0.0 || spec.charged() != 0 {
        return Err(Error::Unsupported("planar billiard with σ = 0 and μ = 0 required".into()));
    }
    Ok(())
}

/// Unit direction at a boundary point `x` of the ellipse whose line is
/// tangent to the confocal conic `Q_η`, oriented counterclockwise
/// (`x × y > 0`) or clockwise. The returned vector points into the domain.
pub fn tangent_direction(spec: &BilliardSpec, x: &[f64], eta: f64, ccw: bool) -> Result<Vec<f64>> {
    require_planar_free(spec)?;
    let phi = |t: f64| tangency_value(&spec.axes, x, &[t.cos(), t.sin()], eta, 0.0);
    const SCAN: usize = 720;
    let mut roots = vec![];
    let mut prev = phi(0.0)?;
    for i in 1..=SCAN {
        let t1 = PI * i as f64 / SCAN as f64;
        let cur = phi(t1)?;
        if prev == 0.0 || prev.signum() != cur.signum() {
            let (mut lo, mut hi, mut flo) = (t1 - PI / SCAN as f64, t1, prev);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = phi(mid)?;
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    let n = [x[0] / spec.axes[0], x[1] / spec.axes[1]];
    for t in roots {
        for sgn in [1.0, -1.0] {
            let y = [sgn * t.cos(), sgn * t.sin()];
            let inward = y[0] * n[0] + y[1] * n[1] < 0.0;
            let turn = x[0] * y[1] - x[1] * y[0];
            if inward && ((turn > 0.0) == ccw) {
                return Ok(y.to_vec());
            }
        }
    }
    Err(Error::GrazingOrSingular(format!("no tangent line to the conic η = {eta} from this point")))
}

/// Total polar angle swept by the impact points over `bounces` steps,
/// each advance taken in `[0, 2π)`.
fn swept_angle(spec: &BilliardSpec, s0: &ImpactState, bounces: usize) -> Result<f64> {
    let mut s = s0.clone();
    let mut total = 0.0;
    for _ in 0..bounces {
        let next = jr_step(spec, &s)?;
        let d = next.x[1].atan2(next.x[0]) - s.x[1].atan2(s.x[0]);
        total += d.rem_euclid(2.0 * PI);
        s = next;
    }
    Ok(total)
}

/// Periodic orbit of the planar billiard with an elliptic caustic, found by
/// shooting on the caustic parameter `η ∈ (0, a_min)` from the vertex on
/// the first axis so that `period` bounces turn `winding` times around.
pub fn shoot_periodic(spec: &BilliardSpec, period: usize, winding: usize) -> Result<(f64, ImpactState)> {
    require_planar_free(spec)?;
    if period < 3 || 2 * winding >= period || winding == 0 {
        return Err(Error::InvalidSpec("need period >= 3 and 0 < winding < period/2".into()));
    }
    let x0 = vec![spec.axes[0].sqrt(), 0.0];
    let start = |eta: f64| -> Result<ImpactState> { Ok(ImpactState::new(x0.clone(), tangent_direction(spec, &x0, eta, true)?)) };
    let target = 2.0 * PI * winding as f64;
    let g = |eta: f64| -> Result<f64> { Ok(swept_angle(spec, &start(eta)?, period)? - target) };
    let a_min = spec.axes.iter().cloned().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (1e-6 * a_min, a_min * (1.0 - 1e-6));
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo.signum() == ghi.signum() {
        return Err(Error::LinearAlgebra("shooting interval does not bracket a periodic orbit".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)?.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * a_min {
            break;
        }
    }
    let eta = 0.5 * (lo + hi);
    Ok((eta, start(eta)?))
}

/// Companion orbit for the Poncelet check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PonceletCompanion {
    pub start: ImpactState,
    pub period: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PonceletReport {
    pub period: Option<usize>,
    pub closure_error: Option<f64>,
    pub companion: Option<PonceletCompanion>,
}

impl PonceletReport {
    /// True when a period was found and, if a companion was built, it closes
    /// with the same period.
    pub fn closes(&self) -> bool {
        match (&self.period, &self.companion) {
            (Some(p), Some(c)) => c.period == Some(*p),
            (Some(_), None) => true,
            _ => false,
        }
    }
}

/// Smallest `N <= max_n` with the orbit back at its start to `tol`.
pub fn find_period(spec: &BilliardSpec, s0: &ImpactState, max_n: usize, tol: f64) -> Result<(Option<usize>, f64)> {
    let mut s = s0.clone();
    let mut best = f64::INFINITY;
    for n in 1..=max_n {
        s = jr_step(spec, &s).map_err(|e| Error::Bounce { index: n - 1, source: Box::new(e) })?;
        let d = s.max_diff(s0);
        best = best.min(d);
        if d < tol {
            return Ok((Some(n), d));
        }
    }
    Ok((None, best))
}

/// Boundary point of the ellipse rotated by `angle` (in the elliptic
/// parametrization) from `x`.
pub fn rotate_on_ellipse(axes: &[f64], x: &[f64], angle: f64) -> Vec<f64> {
    let (r0, r1) = (axes[0].sqrt(), axes[1].sqrt());
    let t = (x[1] / r1).atan2(x[0] / r0) + angle;
    vec![r0 * t.cos(), r1 * t.sin()]
}

/// Detect periodicity of `s0`; for the planar free billiard also build a
/// second orbit tangent to the same caustic from a rotated starting point
/// and check that it closes with the same period.
pub fn poncelet_detect(spec: &BilliardSpec, s0: &ImpactState, max_n: usize, tol: f64) -> Result<PonceletReport> {
    s0.validate(spec)?;
    let (period, err) = find_period(spec, s0, max_n, tol)?;
    let mut report = PonceletReport { period, closure_error: period.map(|_| err), companion: None };
    let Some(p) = period else {
        return Ok(report);
    };
    if require_planar_free(spec).is_err() {
        return Ok(report);
    }
    let eta = caustic_parameters(spec, s0)?;
    let Some(&eta) = eta.first() else {
        return Ok(report);
    };
    let ccw = s0.x[0] * s0.y[1] - s0.x[1] * s0.y[0] > 0.0;
    let speed = dot(&s0.y, &s0.y).sqrt();
    // a start point off the orbit: halfway between the first two impacts
    let x1 = jr_step(spec, s0)?.x;
    let t = |x: &[f64]| (x[1] / spec.axes[1].sqrt()).atan2(x[0] / spec.axes[0].sqrt());
    let half = 0.5 * (t(&x1) - t(&s0.x)).rem_euclid(2.0 * PI);
    let angle = if p == 2 { 0.5 } else { half };
    let xt = rotate_on_ellipse(&spec.axes, &s0.x, angle);
    let companion = match tangent_direction(spec, &xt, eta, ccw) {
        Ok(dir) => {
            let start = ImpactState::new(xt, dir.iter().map(|v| v * speed).collect());
            let (cp, _) = find_period(spec, &start, max_n, tol)?;
            Some(PonceletCompanion { start, period: cp })
        }
        Err(_) => None,
    };
    report.companion = companion;
    Ok(report)
}
