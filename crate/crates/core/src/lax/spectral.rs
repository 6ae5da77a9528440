use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{small_pair, LaxPair2};
use crate::dynamics::{PhaseState, SystemKind, SystemSpec};
use crate::error::{Error, Result};

/// `det L(λ)` of the 2×2 pair of the flow (real for every kind).
pub fn det_l(sys: &SystemSpec, s: &PhaseState, lambda: f64) -> Result<f64> {
    Ok(small_pair(sys, s)?.det(lambda)?.re)
}

/// `Ψ(λ) = Π_s (λ - α_s)^{δ_s} det L(λ)`, stored in the scaled variable
/// `t = (λ - center)/scale` for conditioning.
#[derive(Debug, Clone, Serialize)]
pub struct Psi {
    pub center: f64,
    pub scale: f64,
    /// Ascending coefficients in `t`.
    pub coeffs_t: Vec<f64>,
    /// `(α_s, δ_s)` for every group.
    pub factors: Vec<(f64, u32)>,
    #[serde(skip)]
    pair: Option<LaxPair2>,
}

impl Psi {
    pub fn degree(&self) -> usize {
        self.coeffs_t.len() - 1
    }

    /// Evaluate from the stored coefficients.
    pub fn eval(&self, lambda: f64) -> f64 {
        let t = (lambda - self.center) / self.scale;
        self.coeffs_t.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// Evaluate directly as the product with `det L` (off the poles).
    pub fn eval_direct(&self, lambda: f64) -> Result<f64> {
        let pair = self.pair.as_ref().ok_or_else(|| Error::Unsupported("no Lax data attached".into()))?;
        let det = pair.det(lambda)?.re;
        Ok(self.factors.iter().fold(det, |acc, (al, d)| acc * (lambda - al).powi(*d as i32)))
    }

    /// Ascending coefficients in `λ`.
    pub fn coefficients(&self) -> Vec<f64> {
        // Σ c_k ((λ - c)/s)^k expanded by Horner on polynomials.
        let mut out = vec![0.0; self.coeffs_t.len()];
        let mut acc: Vec<f64> = vec![];
        for c in self.coeffs_t.iter().rev() {
            // acc = acc * (λ - center)/scale + c
            let mut next = vec![0.0; acc.len() + 1];
            for (k, v) in acc.iter().enumerate() {
                next[k + 1] += v / self.scale;
                next[k] -= v * self.center / self.scale;
            }
            next[0] += c;
            acc = next;
        }
        out[..acc.len()].copy_from_slice(&acc);
        out
    }

    fn eval_t(&self, t: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for c in self.coeffs_t.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    /// Real zeros: companion-matrix eigenvalues, polished by Newton on the
    /// coefficients and by bisection on the direct evaluation when a sign
    /// change brackets the candidate.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        let deg = self.degree();
        if deg == 0 {
            return Ok(vec![]);
        }
        let lead = self.coeffs_t[deg];
        if lead == 0.0 {
            return Err(Error::LinearAlgebra("leading coefficient vanishes".into()));
        }
        let mut comp = DMatrix::<f64>::zeros(deg, deg);
        for k in 0..deg {
            comp[(0, k)] = -self.coeffs_t[deg - 1 - k] / lead;
            if k + 1 < deg {
                comp[(k + 1, k)] = 1.0;
            }
        }
        let eig = comp.complex_eigenvalues();
        let mut roots: Vec<f64> = vec![];
        for e in eig.iter() {
            if e.im.abs() > 1e-6 * (1.0 + e.re.abs()) {
                continue;
            }
            let mut t = e.re;
            for _ in 0..50 {
                let (p, dp) = self.eval_t(t);
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                t -= step;
                if step.abs() <= 1e-16 * (1.0 + t.abs()) {
                    break;
                }
            }
            let mut lambda = self.center + self.scale * t;
            if self.pair.is_some() {
                lambda = self.bisect_direct(lambda).unwrap_or(lambda);
            }
            if roots.iter().all(|r| (r - lambda).abs() > 1e-9 * (1.0 + lambda.abs())) {
                roots.push(lambda);
            }
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        Ok(roots)
    }

    fn bisect_direct(&self, guess: f64) -> Option<f64> {
        let h = 1e-7 * (1.0 + guess.abs());
        let (mut lo, mut hi) = (guess - h, guess + h);
        let (mut flo, fhi) = (self.eval_direct(lo).ok()?, self.eval_direct(hi).ok()?);
        if flo == 0.0 {
            return Some(lo);
        }
        if flo.signum() == fhi.signum() {
            return None;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let fm = self.eval_direct(mid).ok()?;
            if fm == 0.0 {
                return Some(mid);
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + guess.abs()) {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Sample abscissae: midpoints between the sorted pole locations followed
/// by points beyond the extremes, alternating sides.
fn sample_points(poles: &[f64], count: usize) -> Vec<f64> {
    let mut sorted = poles.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let gap = ((hi - lo) / (sorted.len() as f64)).max(0.25 * (1.0 + hi.abs()));
    let mut pts: Vec<f64> = sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut k = 1.0;
    while pts.len() < count {
        pts.push(hi + k * gap);
        if pts.len() < count {
            pts.push(lo - k * gap);
        }
        k += 1.0;
    }
    pts.truncate(count);
    pts
}

/// Build `Ψ` from the 2×2 pair: `δ_s = 2` for groups of size at least two
/// or carrying a Rosochatius constant, else 1.
pub fn psi_poly(sys: &SystemSpec, s: &PhaseState) -> Result<Psi> {
    let pair = small_pair(sys, s)?;
    let groups = sys.spec.partition();
    let values = sys.spec.group_values();
    let factors: Vec<(f64, u32)> = groups
        .iter()
        .zip(&values)
        .map(|(g, al)| {
            let charged = g.iter().any(|&i| sys.mu[i] != 0.0);
            (*al, if g.len() >= 2 || charged { 2 } else { 1 })
        })
        .collect();
    let total: usize = factors.iter().map(|(_, d)| *d as usize).sum();
    let poly = match sys.kind {
        SystemKind::SeparableHierarchy => sys.sigmas.clone(),
        _ => vec![sys.sigma],
    };
    let degree = match poly.iter().rposition(|c| *c != 0.0) {
        Some(top) => total + top,
        None => total - 1,
    };
    let lambdas = sample_points(&values, degree + 1);
    let (mn, mx) = lambdas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let center = 0.5 * (mn + mx);
    let scale = (0.5 * (mx - mn)).max(1e-3);
    let mut psi = Psi { center, scale, coeffs_t: vec![], factors, pair: Some(pair) };
    let m = lambdas.len();
    let vander = DMatrix::from_fn(m, m, |i, k| ((lambdas[i] - center) / scale).powi(k as i32));
    let rhs = DVector::from_iterator(m, lambdas.iter().map(|l| psi.eval_direct(*l)).collect::<Result<Vec<_>>>()?);
    let sol = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LinearAlgebra("singular Vandermonde system".into()))?;
    psi.coeffs_t = sol.iter().copied().collect();
    Ok(psi)
}
