use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_len, Error, Result};

/// Polar data of a complex state under the torus action `z_k -> e^{iφ} z_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusReduction {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Angular momenta `h_k = (i/2)(z_k p̄_k - p_k z̄_k)`, kept with sign.
    pub mu: Vec<f64>,
    pub phases: Vec<f64>,
}

const ZERO_RADIUS: f64 = 1e-300;

/// `x_k = |z_k|`, `μ_k = h_k`, `y_k = Re(p_k e^{-iφ_k})`. At `z_k = 0` the
/// phase is taken from `p_k`, which is admissible only when `h_k = 0`.
pub fn torus_reduce(z: &[Complex64], p: &[Complex64]) -> Result<TorusReduction> {
    check_len(z.len(), p.len())?;
    let n = z.len();
    let mut out = TorusReduction { x: vec![0.0; n], y: vec![0.0; n], mu: vec![0.0; n], phases: vec![0.0; n] };
    for k in 0..n {
        let h = -(z[k] * p[k].conj()).im;
        let r = z[k].norm();
        if r <= ZERO_RADIUS {
            if h.abs() > 1e-15 * (1.0 + p[k].norm()) {
                return Err(Error::ReductionSingular { index: k });
            }
            out.phases[k] = if p[k].norm() > 0.0 { p[k].arg() } else { 0.0 };
            out.y[k] = (p[k] * Complex64::from_polar(1.0, -out.phases[k])).re;
            continue;
        }
        let phi = z[k].arg();
        out.x[k] = r;
        out.mu[k] = h;
        out.phases[k] = phi;
        out.y[k] = (p[k] * Complex64::from_polar(1.0, -phi)).re;
    }
    Ok(out)
}

/// Inverse of [`torus_reduce`]: `z_k = x_k e^{iφ_k}`, `p_k = (y_k + iμ_k/x_k) e^{iφ_k}`.
pub fn torus_reconstruct(r: &TorusReduction) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = r.x.len();
    for v in [&r.y, &r.mu, &r.phases] {
        check_len(n, v.len())?;
    }
    let mut z = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for k in 0..n {
        let e = Complex64::from_polar(1.0, r.phases[k]);
        let ang = if r.mu[k] == 0.0 {
            0.0
        } else if r.x[k] == 0.0 {
            return Err(Error::ReductionSingular { index: k });
        } else {
            r.mu[k] / r.x[k]
        };
        z.push(e * r.x[k]);
        p.push(Complex64::new(r.y[k], ang) * e);
    }
    Ok((z, p))
}
