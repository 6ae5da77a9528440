use serde::Serialize;

use crate::dynamics::{energy, PhaseState, SystemKind, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::inv_pow_dot;

/// Names one scalar integral of a real `(x, y)` system. Indices `i`, `j`
/// are global coordinate indices; `s` indexes the partition groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IntegralId {
    F(usize),
    FTilde(usize),
    PS(usize),
    Pij { s: usize, i: usize, j: usize },
    L { s: usize, k: usize },
}

impl std::fmt::Display for IntegralId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntegralId::F(i) => write!(f, "f_{i}"),
            IntegralId::FTilde(s) => write!(f, "ft_{s}"),
            IntegralId::PS(s) => write!(f, "P_{s}"),
            IntegralId::Pij { s, i, j } => write!(f, "P_{s},{i}{j}"),
            IntegralId::L { s, k } => write!(f, "L_{s},{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairIntegral {
    pub group: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// The conserved quantities of a flow at one state, indexed by the
/// partition of equal axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralFamily {
    pub groups: Vec<Vec<usize>>,
    pub group_values: Vec<f64>,
    /// Residues `f_i` of `det L` (distinct axes only).
    pub f: Option<Vec<f64>>,
    /// `g_i = y_i ξ_i - x_i η_i` of the double flow.
    pub g: Option<Vec<f64>>,
    pub f_tilde: Vec<f64>,
    pub p_pairs: Vec<PairIntegral>,
    pub p_s: Vec<f64>,
    /// `l_sk[s][k-1] = L_{s,k}` for `k = 1..k_s-1`.
    pub l_sk: Vec<Vec<f64>>,
    /// `<A^-1 y,y><A^-2 x,x> - σ<A^-2 x,x>` (Jacobi and complex flows).
    pub j: Option<f64>,
    pub hamiltonian: f64,
}

impl IntegralFamily {
    pub fn f_values(&self) -> Result<&[f64]> {
        self.f.as_deref().ok_or(Error::SymmetricSpec)
    }
}

/// `(y_i x_j - x_i y_j)² + μ_i² x_j²/x_i² + μ_j² x_i²/x_j²`.
pub(crate) fn p_ij(mu: &[f64], x: &[f64], y: &[f64], i: usize, j: usize) -> f64 {
    let phi = y[i] * x[j] - x[i] * y[j];
    let mut v = phi * phi;
    if mu[i] != 0.0 {
        v += mu[i] * mu[i] * x[j] * x[j] / (x[i] * x[i]);
    }
    if mu[j] != 0.0 {
        v += mu[j] * mu[j] * x[i] * x[i] / (x[j] * x[j]);
    }
    v
}

/// Potential part of `f_i`: `σ x_i²`, or `Σ_k σ_k F_i^(k)` for the hierarchy.
fn potential_terms(sys: &SystemSpec, x: &[f64]) -> Result<Vec<f64>> {
    match sys.kind {
        SystemKind::SeparableHierarchy => sys.potential().weighted_f(sys.axes(), x),
        _ => Ok(x.iter().map(|v| sys.sigma * v * v).collect()),
    }
}

fn real_xy_kind(sys: &SystemSpec) -> Result<()> {
    if sys.kind.is_real_ellipsoid() || sys.kind.is_free() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("integral requires real (x, y) coordinates, not {}", sys.kind.name())))
    }
}

/// Diagonal part of `f_i` / `f̃_s`: `y_i² + W_i + μ_i²/x_i²`.
fn diag_term(sys: &SystemSpec, w: &[f64], x: &[f64], y: &[f64], i: usize) -> f64 {
    let mu = sys.mu[i];
    let ros = if mu != 0.0 { mu * mu / (x[i] * x[i]) } else { 0.0 };
    y[i] * y[i] + w[i] + ros
}

fn f_tilde_of(sys: &SystemSpec, w: &[f64], x: &[f64], y: &[f64], group: &[usize]) -> f64 {
    let a = sys.axes();
    group
        .iter()
        .map(|&i| {
            let cross: f64 = (0..a.len())
                .filter(|j| !group.contains(j))
                .map(|j| p_ij(&sys.mu, x, y, i, j) / (a[i] - a[j]))
                .sum();
            diag_term(sys, w, x, y, i) + cross
        })
        .sum()
}

fn pair_sum(sys: &SystemSpec, x: &[f64], y: &[f64], idx: &[usize]) -> f64 {
    let mut v = 0.0;
    for (p, &i) in idx.iter().enumerate() {
        for &j in &idx[p + 1..] {
            v += p_ij(&sys.mu, x, y, i, j);
        }
    }
    v
}

/// Value of one integral on the flat vector `z = (x, y)`, the form used
/// for bracket computations.
pub fn integral_value(sys: &SystemSpec, id: IntegralId, z: &[f64]) -> Result<f64> {
    real_xy_kind(sys)?;
    let n = sys.axes().len();
    crate::error::check_len(2 * n, z.len())?;
    let (x, y) = z.split_at(n);
    let groups = sys.spec.partition();
    let group = |s: usize| -> Result<&Vec<usize>> {
        groups.get(s).ok_or_else(|| Error::InvalidSpec(format!("no group {s}")))
    };
    let w = potential_terms(sys, x)?;
    Ok(match id {
        IntegralId::F(i) => {
            if !sys.spec.is_distinct() {
                return Err(Error::SymmetricSpec);
            }
            f_tilde_of(sys, &w, x, y, &[i])
        }
        IntegralId::FTilde(s) => f_tilde_of(sys, &w, x, y, group(s)?),
        IntegralId::PS(s) => pair_sum(sys, x, y, group(s)?),
        IntegralId::Pij { s, i, j } => {
            let g = group(s)?;
            if !g.contains(&i) || !g.contains(&j) || i == j {
                return Err(Error::InvalidSpec(format!("({i}, {j}) is not a pair of group {s}")));
            }
            p_ij(&sys.mu, x, y, i, j)
        }
        IntegralId::L { s, k } => {
            let g = group(s)?;
            if k == 0 || k >= g.len() {
                return Err(Error::InvalidSpec(format!("L_{s},{k} needs 1 <= k < {}", g.len())));
            }
            pair_sum(sys, x, y, &g[..=k])
        }
    })
}

pub fn integral_family(sys: &SystemSpec, s: &PhaseState) -> Result<IntegralFamily> {
    s.check_len(sys)?;
    let a = sys.axes();
    let n = a.len();
    let groups = sys.spec.partition().to_vec();
    let group_values = sys.spec.group_values();
    let hamiltonian = energy(sys, s)?;
    let mut fam = IntegralFamily {
        groups: groups.clone(),
        group_values,
        f: None,
        g: None,
        f_tilde: vec![],
        p_pairs: vec![],
        p_s: vec![],
        l_sk: vec![],
        j: None,
        hamiltonian,
    };
    match sys.kind {
        SystemKind::DoubleJacobi | SystemKind::ComplexJacobi => {
            // f_i = y_i η_i + σ x_i ξ_i + Σ (y_i x_j - y_j x_i)(η_i ξ_j - η_j ξ_i)/(a_i - a_j)
            let (x, xi, y, eta, re) = if sys.kind == SystemKind::DoubleJacobi {
                let (x, xi, y, eta) = s.split_double();
                let c = |v: &[f64]| v.iter().map(|t| crate::lax::C::new(*t, 0.0)).collect::<Vec<_>>();
                (c(x), c(xi), c(y), c(eta), true)
            } else {
                let (z, p) = s.split_complex();
                let zb = z.iter().map(|v| v.conj()).collect();
                let pb = p.iter().map(|v| v.conj()).collect();
                (z, zb, p, pb, false)
            };
            if sys.spec.is_distinct() {
                let f: Vec<f64> = (0..n)
                    .map(|i| {
                        let mut v = y[i] * eta[i] + x[i] * xi[i] * sys.sigma;
                        for j in (0..n).filter(|&j| j != i) {
                            v += (y[i] * x[j] - y[j] * x[i]) * (eta[i] * xi[j] - eta[j] * xi[i]) / (a[i] - a[j]);
                        }
                        v.re
                    })
                    .collect();
                fam.f_tilde = f.clone();
                fam.f = Some(f);
            }
            if re {
                fam.g = Some((0..n).map(|i| (y[i] * xi[i] - x[i] * eta[i]).re).collect());
            } else {
                let (z, p) = s.split_complex();
                let w: f64 = z.iter().zip(a).map(|(v, ai)| v.norm_sqr() / (ai * ai)).sum();
                let pp: f64 = p.iter().zip(a).map(|(v, ai)| v.norm_sqr() / ai).sum();
                fam.j = Some(pp * w - sys.sigma * w);
            }
            return Ok(fam);
        }
        _ => {}
    }
    let (x, y) = (&s.x, &s.y);
    let w = potential_terms(sys, x)?;
    if sys.spec.is_distinct() {
        fam.f = Some((0..n).map(|i| f_tilde_of(sys, &w, x, y, &[i])).collect());
    }
    for (si, g) in groups.iter().enumerate() {
        fam.f_tilde.push(f_tilde_of(sys, &w, x, y, g));
        fam.p_s.push(pair_sum(sys, x, y, g));
        fam.l_sk.push((1..g.len()).map(|k| pair_sum(sys, x, y, &g[..=k])).collect());
        for (p, &i) in g.iter().enumerate() {
            for &j in &g[p + 1..] {
                fam.p_pairs.push(PairIntegral { group: si, i, j, value: p_ij(&sys.mu, x, y, i, j) });
            }
        }
    }
    if sys.kind == SystemKind::Jacobi {
        let wx = inv_pow_dot(a, 2, x, x);
        fam.j = Some(inv_pow_dot(a, 1, y, y) * wx - sys.sigma * wx);
    }
    Ok(fam)
}

/// `Σ f̃_s/α_s - (V_0 + Σ P_s/α_s² + Σ μ_i²/a_i²)`, where `V_0` is the
/// constant term of the polynomial part of `det L` (`σ`, or `σ_1`).
pub fn peta_residual(sys: &SystemSpec, s: &PhaseState) -> Result<f64> {
    if !sys.kind.is_real_ellipsoid() {
        return Err(Error::Unsupported("the relation holds on the ellipsoid phase space".into()));
    }
    let fam = integral_family(sys, s)?;
    let lhs: f64 = fam.f_tilde.iter().zip(&fam.group_values).map(|(f, al)| f / al).sum();
    let v0 = sys.hierarchy_sigmas()[0];
    let rhs = v0
        + fam.p_s.iter().zip(&fam.group_values).map(|(p, al)| p / (al * al)).sum::<f64>()
        + sys.mu.iter().zip(sys.axes()).map(|(m, a)| m * m / (a * a)).sum::<f64>();
    Ok(lhs - rhs)
}
