//! Separable polynomial potentials `V^(k)`, the Rosochatius basis, the
//! Bertrand-Darboux residual and the `Δ_k`, `Ω_k` data of the hierarchy
//! Lax pairs.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, inv_pow_dot};

/// `V(x) = ½ Σ_k σ_k V^(k)(x) + ½ Σ_i μ_i² / x_i²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub sigmas: Vec<f64>,
    pub mu: Vec<f64>,
}

/// `V^(k)`, `F_i^(k)` and their gradients for `k = 1..=m` at one point.
/// Index `k - 1` holds level `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyTables {
    pub v: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub grad_v: Vec<Vec<f64>>,
    /// `grad_f[k][i][l] = ∂F_i^(k+1) / ∂x_l`.
    pub grad_f: Vec<Vec<Vec<f64>>>,
}

impl HierarchyTables {
    pub fn levels(&self) -> usize {
        self.v.len()
    }
}

/// Fill the hierarchy by `F_i^(k+1) = a_i F_i^(k) - x_i² V^(k)`, `F_i^(1) = x_i²`,
/// `V^(k) = Σ_i F_i^(k)`, differentiating the recurrence for the gradients.
pub fn hierarchy_eval(axes: &[f64], x: &[f64], m: usize) -> Result<HierarchyTables> {
    check_len(axes.len(), x.len())?;
    if m == 0 {
        return Err(Error::InvalidSpec("hierarchy depth m must be at least 1".into()));
    }
    let n = x.len();
    let mut f = vec![x.iter().map(|v| v * v).collect::<Vec<f64>>()];
    let mut grad_f = vec![(0..n)
        .map(|i| (0..n).map(|l| if l == i { 2.0 * x[i] } else { 0.0 }).collect())
        .collect::<Vec<Vec<f64>>>()];
    let mut v = vec![f[0].iter().sum::<f64>()];
    let mut grad_v = vec![x.iter().map(|xi| 2.0 * xi).collect::<Vec<f64>>()];

    for k in 1..m {
        let (fp, gfp, vp, gvp) = (&f[k - 1], &grad_f[k - 1], v[k - 1], &grad_v[k - 1]);
        let fk: Vec<f64> = (0..n).map(|i| axes[i] * fp[i] - x[i] * x[i] * vp).collect();
        let gfk: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|l| {
                        let own = if l == i { 2.0 * x[i] * vp } else { 0.0 };
                        axes[i] * gfp[i][l] - own - x[i] * x[i] * gvp[l]
                    })
                    .collect()
            })
            .collect();
        let vk = fk.iter().sum();
        let gvk = (0..n).map(|l| gfk.iter().map(|row| row[l]).sum()).collect();
        f.push(fk);
        grad_f.push(gfk);
        v.push(vk);
        grad_v.push(gvk);
    }
    Ok(HierarchyTables { v, f, grad_v, grad_f })
}

impl PotentialSpec {
    /// `½ Σ σ_k V^(k)` without the Rosochatius part.
    pub fn polynomial_value(&self, axes: &[f64], x: &[f64]) -> Result<f64> {
        if self.sigmas.is_empty() {
            return Ok(0.0);
        }
        let t = hierarchy_eval(axes, x, self.sigmas.len())?;
        Ok(0.5 * self.sigmas.iter().zip(&t.v).map(|(s, v)| s * v).sum::<f64>())
    }

    pub fn polynomial_gradient(&self, axes: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        if self.sigmas.is_empty() {
            return Ok(g);
        }
        let t = hierarchy_eval(axes, x, self.sigmas.len())?;
        for (s, gv) in self.sigmas.iter().zip(&t.grad_v) {
            for (gi, d) in g.iter_mut().zip(gv) {
                *gi += 0.5 * s * d;
            }
        }
        Ok(g)
    }

    /// `Σ_k σ_k F_i^(k)`, the potential contribution to the separated integrals.
    pub fn weighted_f(&self, axes: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        if self.sigmas.is_empty() {
            return Ok(out);
        }
        let t = hierarchy_eval(axes, x, self.sigmas.len())?;
        for (s, fk) in self.sigmas.iter().zip(&t.f) {
            for (o, v) in out.iter_mut().zip(fk) {
                *o += s * v;
            }
        }
        Ok(out)
    }

    pub fn value(&self, axes: &[f64], x: &[f64]) -> Result<f64> {
        let ros: f64 = self
            .mu
            .iter()
            .zip(x)
            .filter(|(m, _)| **m != 0.0)
            .map(|(m, xi)| 0.5 * m * m / (xi * xi))
            .sum();
        Ok(self.polynomial_value(axes, x)? + ros)
    }

    pub fn gradient(&self, axes: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.polynomial_gradient(axes, x)?;
        for ((gi, m), xi) in g.iter_mut().zip(&self.mu).zip(x) {
            if *m != 0.0 {
                *gi -= m * m / (xi * xi * xi);
            }
        }
        Ok(g)
    }
}

/// Degree of a Rosochatius basis potential: `V_s^(-1)` or `V_s^(-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RosochatiusDegree {
    Minus1,
    Minus2,
}

impl TryFrom<i32> for RosochatiusDegree {
    type Error = Error;
    fn try_from(d: i32) -> Result<Self> {
        match d {
            -1 => Ok(Self::Minus1),
            -2 => Ok(Self::Minus2),
            _ => Err(Error::InvalidSpec(format!("Rosochatius degree must be -1 or -2, got {d}"))),
        }
    }
}

/// `(V_s^(-k), [F_{s,i}^(-k)])` with `F_{s,s}` closing the sum.
pub fn rosochatius_eval(
    axes: &[f64],
    x: &[f64],
    s: usize,
    degree: RosochatiusDegree,
) -> Result<(f64, Vec<f64>)> {
    check_len(axes.len(), x.len())?;
    if s >= x.len() {
        return Err(Error::InvalidSpec(format!("index {s} out of range")));
    }
    if x[s] == 0.0 {
        return Err(Error::SingularAxis { index: s, value: 0.0 });
    }
    let xs2 = x[s] * x[s];
    let mut f = vec![0.0; x.len()];
    let v = match degree {
        RosochatiusDegree::Minus1 => {
            for i in (0..x.len()).filter(|&i| i != s) {
                f[i] = x[i] * x[i] / ((axes[i] - axes[s]) * xs2);
            }
            1.0 / xs2
        }
        RosochatiusDegree::Minus2 => {
            let mut bracket = 1.0;
            for j in (0..x.len()).filter(|&j| j != s) {
                if axes[j] == axes[s] {
                    return Err(Error::Pole { value: axes[s], axis: axes[j] });
                }
                bracket += x[j] * x[j] / (axes[s] - axes[j]);
            }
            let xs4 = xs2 * xs2;
            for i in (0..x.len()).filter(|&i| i != s) {
                f[i] = 2.0 * x[i] * x[i] * bracket / ((axes[i] - axes[s]) * xs4);
            }
            bracket / xs4
        }
    };
    let rest: f64 = f.iter().sum();
    f[s] = v - rest;
    Ok((v, f))
}

/// Gradient and Hessian rows `i`, `j` by central differences, Richardson
/// extrapolated over three step sizes (sixth order).
fn richardson_derivatives<F: Fn(&[f64]) -> f64 + ?Sized>(
    v: &F,
    x: &[f64],
    rows: [usize; 2],
) -> (Vec<f64>, [Vec<f64>; 2]) {
    let n = x.len();
    let base: Vec<f64> = x.iter().map(|xi| 4e-3 * (1.0 + xi.abs())).collect();
    let level = |scale: f64| {
        let h: Vec<f64> = base.iter().map(|b| b * scale).collect();
        let mut w = x.to_vec();
        let mut eval = |d: &[(usize, f64)]| {
            for &(k, s) in d {
                w[k] += s;
            }
            let r = v(&w);
            w.copy_from_slice(x);
            r
        };
        let f0 = eval(&[]);
        let grad: Vec<f64> = (0..n)
            .map(|k| (eval(&[(k, h[k])]) - eval(&[(k, -h[k])])) / (2.0 * h[k]))
            .collect();
        let hess_row = |i: usize, eval: &mut dyn FnMut(&[(usize, f64)]) -> f64| -> Vec<f64> {
            (0..n)
                .map(|l| {
                    if l == i {
                        (eval(&[(i, h[i])]) - 2.0 * f0 + eval(&[(i, -h[i])])) / (h[i] * h[i])
                    } else {
                        (eval(&[(i, h[i]), (l, h[l])]) - eval(&[(i, h[i]), (l, -h[l])])
                            - eval(&[(i, -h[i]), (l, h[l])])
                            + eval(&[(i, -h[i]), (l, -h[l])]))
                            / (4.0 * h[i] * h[l])
                    }
                })
                .collect()
        };
        let ri = hess_row(rows[0], &mut eval);
        let rj = hess_row(rows[1], &mut eval);
        (grad, ri, rj)
    };
    let combine = |a: &[f64], b: &[f64], c: &[f64]| -> Vec<f64> {
        // D(h), D(h/2), D(h/4) → eliminate h² then h⁴.
        (0..a.len())
            .map(|k| {
                let r1 = (4.0 * b[k] - a[k]) / 3.0;
                let r2 = (4.0 * c[k] - b[k]) / 3.0;
                (16.0 * r2 - r1) / 15.0
            })
            .collect()
    };
    let (g1, i1, j1) = level(1.0);
    let (g2, i2, j2) = level(0.5);
    let (g3, i3, j3) = level(0.25);
    (combine(&g1, &g2, &g3), [combine(&i1, &i2, &i3), combine(&j1, &j2, &j3)])
}

/// Bertrand-Darboux residual for the index pair `(i, j)`:
/// `(a_j - a_i) ∂²V/∂x_i∂x_j + (x_i ∂_j - x_j ∂_i)(2V + Σ_k x_k ∂_k V)`.
///
/// The sign of the first term is the one under which `V^(k)` and the
/// Rosochatius basis are annihilated for this confocal family.
pub fn bd_residual<F: Fn(&[f64]) -> f64 + ?Sized>(
    axes: &[f64],
    v: &F,
    x: &[f64],
    i: usize,
    j: usize,
) -> Result<f64> {
    check_len(axes.len(), x.len())?;
    if i == j || i >= x.len() || j >= x.len() {
        return Err(Error::InvalidSpec(format!("invalid index pair ({i}, {j})")));
    }
    let (grad, [row_i, row_j]) = richardson_derivatives(v, x, [i, j]);
    // ∂_l (2V + Σ x_k ∂_k V) = 3 ∂_l V + Σ_k x_k ∂_lk V
    let dw = |l: usize, row: &[f64]| 3.0 * grad[l] + dot(x, row);
    Ok((axes[j] - axes[i]) * row_i[j] + x[i] * dw(j, &row_j) - x[j] * dw(i, &row_i))
}

/// `Δ_k(x, λ)`, `Ω_k(x, λ)` and the residual of the identity
/// `2Ω_k(1 + q_λ(x,x)) = 2Δ_k + <A_λ^{-1} x, ∇V^(k)>` at `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaOmega {
    pub delta: f64,
    pub omega: f64,
    pub identity_residual: f64,
}

/// Ascending λ-coefficients of `Δ_k = λ^{k-1} - λ^{k-2} V^(1) - ... - V^(k-1)`.
pub fn delta_coefficients(tables: &HierarchyTables, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k];
    c[k - 1] = 1.0;
    for j in 1..k {
        c[k - 1 - j] = -tables.v[j - 1];
    }
    c
}

/// Ascending λ-coefficients of `Ω_k`, obtained by matching powers of λ in
/// the defining identity expanded at `λ = ∞`:
/// `q_λ(x,x) = Σ_m <A^m x,x> λ^{-m-1}`, `<A_λ^{-1}x, g> = Σ_m <A^m x, g> λ^{-m-1}`.
pub fn omega_coefficients(axes: &[f64], x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidSpec("k must be at least 1".into()));
    }
    let tables = hierarchy_eval(axes, x, k)?;
    let delta = delta_coefficients(&tables, k);
    // moments[m] = <A^m x, x>
    let moments: Vec<f64> = (0..k)
        .map(|m| axes.iter().zip(x).map(|(a, xi)| a.powi(m as i32) * xi * xi).sum())
        .collect();
    let mut c = vec![0.0; k];
    for p in (0..k).rev() {
        let mut acc = delta[p];
        for j in 1..k - p {
            acc -= c[p + j] * moments[j - 1];
        }
        c[p] = acc;
    }
    Ok(c)
}

pub fn eval_poly(coeffs: &[f64], lambda: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * lambda + c)
}

pub fn delta_omega(axes: &[f64], x: &[f64], lambda: f64, k: usize) -> Result<DeltaOmega> {
    check_len(axes.len(), x.len())?;
    if k == 0 {
        return Err(Error::InvalidSpec("k must be at least 1".into()));
    }
    crate::geometry::QuadricParam::new(lambda, axes)?;
    let tables = hierarchy_eval(axes, x, k)?;
    let delta = eval_poly(&delta_coefficients(&tables, k), lambda);
    let omega = eval_poly(&omega_coefficients(axes, x, k)?, lambda);
    let q = crate::linalg::q_form(lambda, axes, x, x);
    let pairing = crate::linalg::q_form(lambda, axes, x, &tables.grad_v[k - 1]);
    let identity_residual = 2.0 * omega * (1.0 + q) - 2.0 * delta - pairing;
    Ok(DeltaOmega { delta, omega, identity_residual })
}

/// `<∇V⁺(x), A^-1 x>` for the polynomial part of a potential.
pub fn gradient_pairing(spec: &PotentialSpec, axes: &[f64], x: &[f64]) -> Result<f64> {
    let g = spec.polynomial_gradient(axes, x)?;
    let ax: Vec<f64> = x.iter().zip(axes).map(|(xi, a)| xi / a).collect();
    Ok(dot(&g, &ax))
}

#[doc(hidden)]
pub fn a_inv_sq_norm(axes: &[f64], x: &[f64]) -> f64 {
    inv_pow_dot(axes, 2, x, x)
}
