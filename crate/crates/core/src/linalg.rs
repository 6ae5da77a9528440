//! Small dense helpers shared by the numerical modules.

use num_complex::Complex64;

#[inline]
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `Σ u_i v_i / a_i^p`, i.e. `<A^-p u, v>` for diagonal `A`.
#[inline]
pub fn inv_pow_dot(axes: &[f64], p: i32, u: &[f64], v: &[f64]) -> f64 {
    axes.iter()
        .zip(u.iter().zip(v))
        .map(|(a, (ui, vi))| ui * vi / a.powi(p))
        .sum()
}

/// `q_λ(u, v) = Σ u_i v_i / (λ - a_i)`.
#[inline]
pub fn q_form(lambda: f64, axes: &[f64], u: &[f64], v: &[f64]) -> f64 {
    axes.iter()
        .zip(u.iter().zip(v))
        .map(|(a, (ui, vi))| ui * vi / (lambda - a))
        .sum()
}

/// Complex bilinear `q_λ(u, v) = Σ u_i v_i / (λ - a_i)` (no conjugation).
#[inline]
pub fn q_form_c(lambda: f64, axes: &[f64], u: &[Complex64], v: &[Complex64]) -> Complex64 {
    axes.iter()
        .zip(u.iter().zip(v))
        .map(|(a, (ui, vi))| ui * vi / (lambda - a))
        .sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// `μ_i / x_i`, with zero wherever `μ_i = 0`.
pub fn mu_over_x(mu: &[f64], x: &[f64]) -> Vec<f64> {
    mu.iter()
        .zip(x)
        .map(|(m, xi)| if *m == 0.0 { 0.0 } else { m / xi })
        .collect()
}

/// Central-difference gradient with step `rel * (1 + |z_k|)`.
pub fn central_gradient<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, z: &[f64], rel: f64) -> Vec<f64> {
    let mut work = z.to_vec();
    (0..z.len())
        .map(|k| {
            let h = rel * (1.0 + z[k].abs());
            work[k] = z[k] + h;
            let fp = f(&work);
            work[k] = z[k] - h;
            let fm = f(&work);
            work[k] = z[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}
