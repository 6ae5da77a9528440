//! Seeded random draws of admissible states.
//!
//! All randomness goes through [`Rng`], ChaCha8 seeded with
//! `seed_from_u64`, whose stream is fixed across platforms.

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{project, PhaseState, SystemKind, SystemSpec};
use crate::error::Result;
use crate::linalg::{dot, inv_pow_dot};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw (Box-Muller).
pub fn normal(rng: &mut Rng) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random::<f64>();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn normal_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// A point of `<A^-1 x,x> = 1` whose coordinates are bounded away from
/// the hyperplanes: `|x_k| >= min_frac * sqrt(a_k) / sqrt(n)`, and
/// `x_k > 0` wherever `positive[k]`.
pub fn point_on_ellipsoid(rng: &mut Rng, axes: &[f64], positive: &[bool], min_frac: f64) -> Vec<f64> {
    let n = axes.len();
    loop {
        let mut u = normal_vec(rng, n);
        for k in 0..n {
            if positive.get(k).copied().unwrap_or(false) {
                u[k] = u[k].abs();
            }
            u[k] *= axes[k].sqrt();
        }
        let r = inv_pow_dot(axes, 1, &u, &u).sqrt();
        if r == 0.0 {
            continue;
        }
        let x: Vec<f64> = u.iter().map(|v| v / r).collect();
        let ok = (0..n).all(|k| x[k].abs() >= min_frac * (axes[k] / n as f64).sqrt());
        if ok {
            return x;
        }
    }
}

/// Random tangent vector at `x` on `<A^-1 x,x> = 1`, with Euclidean norm `speed`.
pub fn tangent_vector(rng: &mut Rng, axes: &[f64], x: &[f64], speed: f64) -> Vec<f64> {
    let nrm: Vec<f64> = x.iter().zip(axes).map(|(v, a)| v / a).collect();
    loop {
        let mut v = normal_vec(rng, x.len());
        let c = dot(&v, &nrm) / dot(&nrm, &nrm);
        for (vi, ni) in v.iter_mut().zip(&nrm) {
            *vi -= c * ni;
        }
        let len = dot(&v, &v).sqrt();
        if len > 1e-3 {
            return v.iter().map(|vi| vi * speed / len).collect();
        }
    }
}

/// A random on-shell state of `sys` (projected to machine precision).
/// Free-space kinds get a point strictly inside the ellipsoid.
pub fn random_state(rng: &mut Rng, sys: &SystemSpec) -> Result<PhaseState> {
    let a = sys.axes();
    let n = a.len();
    let positive: Vec<bool> = sys.mu.iter().map(|m| *m != 0.0).collect();
    let speed = 0.5 + rng.random::<f64>();
    let s = match sys.kind {
        SystemKind::DoubleJacobi => {
            let x = point_on_ellipsoid(rng, a, &[], 0.3);
            let mut xi: Vec<f64> = x.iter().map(|v| v + 0.1 * normal(rng)).collect();
            let c = inv_pow_dot(a, 1, &x, &xi);
            xi.iter_mut().for_each(|v| *v /= c);
            let y = tangent_vector(rng, a, &xi, speed);
            let eta = tangent_vector(rng, a, &x, speed);
            PhaseState::double(&x, &xi, &y, &eta)
        }
        SystemKind::ComplexJacobi => {
            let b: Vec<f64> = [a, a].concat();
            let u = point_on_ellipsoid(rng, &b, &[], 0.2);
            let v = tangent_vector(rng, &b, &u, speed);
            let z: Vec<Complex64> = (0..n).map(|k| Complex64::new(u[k], u[n + k])).collect();
            let p: Vec<Complex64> = (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect();
            PhaseState::complex(&z, &p)
        }
        k if k.is_free() => {
            let x: Vec<f64> = point_on_ellipsoid(rng, a, &positive, 0.3)
                .into_iter()
                .map(|v| 0.7 * v)
                .collect();
            PhaseState::new(x, normal_vec(rng, n))
        }
        _ => {
            let x = point_on_ellipsoid(rng, a, &positive, 0.3);
            let y = tangent_vector(rng, a, &x, speed);
            PhaseState::new(x, y)
        }
    };
    project(sys, &s)
}

/// A double-flow state on the invariant variety
/// `<A^-1 x, η> = <A^-1 y, ξ> = 0`.
pub fn random_invariant_double(rng: &mut Rng, sys: &SystemSpec) -> Result<PhaseState> {
    // random_state already draws y ⊥ A^-1 ξ and η ⊥ A^-1 x.
    random_state(rng, sys)
}

/// A random admissible impact state: a boundary point off the coordinate
/// hyperplanes (positive on charged axes) with an inward momentum that is
/// well away from grazing. For `σ > 0` the speed is raised until the energy
/// margin holds; draws with `σJ² + K² <= 0` are rejected.
pub fn random_impact(rng: &mut Rng, spec: &crate::billiard::BilliardSpec) -> crate::billiard::ImpactState {
    use crate::billiard::ImpactState;
    let a = &spec.axes;
    let positive: Vec<bool> = spec.mu.iter().map(|m| *m != 0.0).collect();
    loop {
        let x = point_on_ellipsoid(rng, a, &positive, 0.3);
        let nrm: Vec<f64> = x.iter().zip(a).map(|(v, ai)| v / ai).collect();
        let nlen = dot(&nrm, &nrm).sqrt();
        let mut speed = 0.5 + rng.random::<f64>();
        let tangential = tangent_vector(rng, a, &x, 1.0);
        let inward = 0.3 + 0.7 * rng.random::<f64>();
        let dir: Vec<f64> = tangential.iter().zip(&nrm).map(|(t, n)| t - inward * n / nlen).collect();
        let dlen = dot(&dir, &dir).sqrt();
        let mut s = ImpactState::new(x, dir.iter().map(|d| d / dlen * speed).collect());
        while spec.check_admissible(&s).is_err() {
            speed *= 1.25;
            s.y = dir.iter().map(|d| d / dlen * speed).collect();
        }
        let jk = spec.joachimsthal(&s);
        let m: Vec<f64> = spec.mu.iter().zip(&s.x).map(|(mu, xi)| if *mu == 0.0 { 0.0 } else { mu / xi }).collect();
        let kk = spec.sigma - inv_pow_dot(a, 1, &s.y, &s.y) - inv_pow_dot(a, 1, &m, &m);
        if spec.sigma * jk * jk + kk * kk > 1e-6 {
            return s;
        }
    }
}
