use super::flows::{constraint_residuals, doubled, rhs_unchecked};
use super::{PhaseState, SystemKind, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, inv_pow_dot};

const PROJECTION_ITERS: usize = 8;

/// Classical fourth-order Runge-Kutta step of size `dt` (may be negative).
pub fn rk4_step(sys: &SystemSpec, s: &PhaseState, dt: f64) -> Result<PhaseState> {
    let stage = |base: &PhaseState, k: &super::Velocity, c: f64| PhaseState {
        x: base.x.iter().zip(&k.dx).map(|(v, d)| v + c * d).collect(),
        y: base.y.iter().zip(&k.dy).map(|(v, d)| v + c * d).collect(),
        t: base.t + c,
    };
    let k1 = rhs_unchecked(sys, s)?;
    let k2 = rhs_unchecked(sys, &stage(s, &k1, 0.5 * dt))?;
    let k3 = rhs_unchecked(sys, &stage(s, &k2, 0.5 * dt))?;
    let k4 = rhs_unchecked(sys, &stage(s, &k3, dt))?;
    let comb = |v: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..v.len())
            .map(|i| v[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
            .collect()
    };
    Ok(PhaseState {
        x: comb(&s.x, &k1.dx, &k2.dx, &k3.dx, &k4.dx),
        y: comb(&s.y, &k1.dy, &k2.dy, &k3.dy, &k4.dy),
        t: s.t + dt,
    })
}

/// Scale `x` along `A^-1 x` back onto `<A^-1 x,x> = 1`, then remove the
/// normal component of `y`.
fn project_ellipsoid(axes: &[f64], s: &mut PhaseState) {
    let n: Vec<f64> = s.x.iter().zip(axes).map(|(v, a)| v / a).collect();
    let mut alpha = 0.0;
    for _ in 0..PROJECTION_ITERS {
        let xa: Vec<f64> = s.x.iter().zip(&n).map(|(v, d)| v + alpha * d).collect();
        let g = inv_pow_dot(axes, 1, &xa, &xa) - 1.0;
        let dg = 2.0 * dot(&xa, &n.iter().zip(axes).map(|(d, a)| d / a).collect::<Vec<_>>());
        if dg == 0.0 {
            break;
        }
        let step = g / dg;
        alpha -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    for (v, d) in s.x.iter_mut().zip(&n) {
        *v += alpha * d;
    }
    let n: Vec<f64> = s.x.iter().zip(axes).map(|(v, a)| v / a).collect();
    let nn = dot(&n, &n);
    if nn > 0.0 {
        let c = dot(&n, &s.y) / nn;
        for (v, d) in s.y.iter_mut().zip(&n) {
            *v -= c * d;
        }
    }
}

/// Move `(x, ξ)` along `(A^-1 ξ, A^-1 x)` to restore `G_1 = 0`, then
/// `(y, η)` along the same directions to restore `G_2 = 0`.
fn project_double(axes: &[f64], s: &mut PhaseState) {
    let n = axes.len();
    let (x0, xi0) = (s.x[..n].to_vec(), s.x[n..].to_vec());
    // G_1(α) = <x + αA^-1ξ, A^-1(ξ + αA^-1x)> - 1
    let c0 = inv_pow_dot(axes, 1, &x0, &xi0) - 1.0;
    let c1 = inv_pow_dot(axes, 2, &xi0, &xi0) + inv_pow_dot(axes, 2, &x0, &x0);
    let c2 = inv_pow_dot(axes, 3, &x0, &xi0);
    let mut alpha = 0.0;
    for _ in 0..PROJECTION_ITERS {
        let g = c0 + alpha * (c1 + alpha * c2);
        let dg = c1 + 2.0 * alpha * c2;
        if dg == 0.0 {
            break;
        }
        let step = g / dg;
        alpha -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    for k in 0..n {
        s.x[k] = x0[k] + alpha * xi0[k] / axes[k];
        s.x[n + k] = xi0[k] + alpha * x0[k] / axes[k];
    }
    let (x, xi) = (s.x[..n].to_vec(), s.x[n..].to_vec());
    let g2 = inv_pow_dot(axes, 1, &s.y[..n], &xi) + inv_pow_dot(axes, 1, &x, &s.y[n..]);
    let d = inv_pow_dot(axes, 2, &xi, &xi) + inv_pow_dot(axes, 2, &x, &x);
    if d > 0.0 {
        let beta = -g2 / d;
        for k in 0..n {
            s.y[k] += beta * xi[k] / axes[k];
            s.y[n + k] += beta * x[k] / axes[k];
        }
    }
}

/// Project a state onto the constraint manifold of its system (a no-op in
/// free space).
pub fn project(sys: &SystemSpec, s: &PhaseState) -> Result<PhaseState> {
    s.check_len(sys)?;
    let mut out = s.clone();
    match sys.kind {
        SystemKind::DoubleJacobi => project_double(sys.axes(), &mut out),
        SystemKind::ComplexJacobi => project_ellipsoid(&doubled(sys.axes()), &mut out),
        k if k.is_real_ellipsoid() => project_ellipsoid(sys.axes(), &mut out),
        _ => {}
    }
    let worst = constraint_residuals(sys, &out)?.into_iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if !(worst <= sys.ctol) {
        return Err(Error::ProjectionFailed { residual: worst });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Keep every `record_every`-th state (the final state is always kept).
    pub record_every: usize,
    /// Disable the post-step projection (for diagnostics only).
    pub project: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { record_every: 1, project: true }
    }
}

/// Integrate from `s0` over a time span `t_span` (negative runs backwards)
/// with step close to `h`; the step is adjusted so that an integer number
/// of steps lands exactly on `t_span`. Returns the states including `s0`.
pub fn integrate(sys: &SystemSpec, s0: &PhaseState, t_span: f64, h: f64) -> Result<Vec<PhaseState>> {
    integrate_with(sys, s0, t_span, h, IntegrateOptions::default())
}

pub fn integrate_with(
    sys: &SystemSpec,
    s0: &PhaseState,
    t_span: f64,
    h: f64,
    opts: IntegrateOptions,
) -> Result<Vec<PhaseState>> {
    if !(h > 0.0) || !t_span.is_finite() {
        return Err(Error::InvalidSpec("step h must be positive and T finite".into()));
    }
    s0.check_len(sys)?;
    let steps = ((t_span.abs() / h).round() as usize).max(usize::from(t_span != 0.0));
    let dt = if steps == 0 { 0.0 } else { t_span / steps as f64 };
    let every = opts.record_every.max(1);
    let mut out = Vec::with_capacity(steps / every + 2);
    out.push(s0.clone());
    let mut s = s0.clone();
    for k in 1..=steps {
        s = rk4_step(sys, &s, dt)?;
        if opts.project {
            s = project(sys, &s)?;
        }
        if k % every == 0 || k == steps {
            out.push(s.clone());
        }
    }
    log::debug!("integrated {} steps of {} (dt = {dt:e})", steps, sys.kind.name());
    Ok(out)
}
