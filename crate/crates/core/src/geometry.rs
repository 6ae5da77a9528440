//! Ellipsoids, confocal quadric families, elliptic coordinates and the
//! tangency functional of lines (or conic arcs) to confocal quadrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::inv_pow_dot;

/// Absolute tolerance on elliptic coordinates.
pub const ELLIPTIC_TOL: f64 = 1e-13;

/// Ellipsoid `<A^-1 x, x> = 1` with `A = diag(a_0, ..., a_n)`.
///
/// Axes are stored in the order given. The partition groups indices with
/// bitwise-equal axis values, ordered by first occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EllipsoidSpec {
    axes: Vec<f64>,
    partition: Vec<Vec<usize>>,
}

impl TryFrom<Vec<f64>> for EllipsoidSpec {
    type Error = Error;
    fn try_from(axes: Vec<f64>) -> Result<Self> {
        EllipsoidSpec::new(axes)
    }
}

impl From<EllipsoidSpec> for Vec<f64> {
    fn from(spec: EllipsoidSpec) -> Self {
        spec.axes
    }
}

impl EllipsoidSpec {
    pub fn new(axes: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidSpec("at least one axis is required".into()));
        }
        if let Some((i, a)) = axes.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidSpec(format!("axis {i} must be positive and finite, got {a}")));
        }
        let mut partition: Vec<Vec<usize>> = Vec::new();
        for (i, a) in axes.iter().enumerate() {
            match partition.iter_mut().find(|g| axes[g[0]].to_bits() == a.to_bits()) {
                Some(g) => g.push(i),
                None => partition.push(vec![i]),
            }
        }
        Ok(Self { axes, partition })
    }

    pub fn axes(&self) -> &[f64] {
        &self.axes
    }

    /// Number of coordinates, `n + 1`.
    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    /// Dimension `n` of the ellipsoid `E^n ⊂ R^{n+1}`.
    pub fn dim(&self) -> usize {
        self.axes.len() - 1
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    /// Common axis value `α_s` of each group.
    pub fn group_values(&self) -> Vec<f64> {
        self.partition.iter().map(|g| self.axes[g[0]]).collect()
    }

    pub fn is_distinct(&self) -> bool {
        self.partition.len() == self.axes.len()
    }

    /// Number of groups with at least two members.
    pub fn nontrivial_groups(&self) -> usize {
        self.partition.iter().filter(|g| g.len() >= 2).count()
    }

    /// Index permutation sorting the axes ascending.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.axes.len()).collect();
        order.sort_by(|&i, &j| self.axes[i].total_cmp(&self.axes[j]));
        order
    }

    /// `F_1 = <A^-1 x, x> - 1`.
    pub fn constraint_value(&self, x: &[f64]) -> f64 {
        inv_pow_dot(&self.axes, 1, x, x) - 1.0
    }
}

/// Elliptic coordinates `λ_0 < λ_1 < ... < λ_n` together with the sign of
/// each Cartesian coordinate (indexed like the axes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticCoords {
    pub lambda: Vec<f64>,
    pub signs: Vec<i8>,
}

/// Confocal family parameter `η`, kept away from the axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadricParam(f64);

impl QuadricParam {
    pub fn new(eta: f64, axes: &[f64]) -> Result<Self> {
        check_pole(eta, axes)?;
        Ok(Self(eta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_pole(eta: f64, axes: &[f64]) -> Result<()> {
    for &a in axes {
        if (eta - a).abs() <= 1e-12 * (1.0 + a.abs()) {
            return Err(Error::Pole { value: eta, axis: a });
        }
    }
    Ok(())
}

pub fn on_ellipsoid(spec: &EllipsoidSpec, x: &[f64], tol: f64) -> Result<bool> {
    check_len(spec.len(), x.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec("tolerance must be positive".into()));
    }
    Ok(spec.constraint_value(x).abs() <= tol)
}

/// `Σ x_i² / (a_i - λ) - 1`; its zeros are the elliptic coordinates of `x`.
pub fn confocal_value(axes: &[f64], x: &[f64], lambda: f64) -> f64 {
    axes.iter().zip(x).map(|(a, xi)| xi * xi / (a - lambda)).sum::<f64>() - 1.0
}

fn confocal_slope(axes: &[f64], x: &[f64], lambda: f64) -> f64 {
    axes.iter()
        .zip(x)
        .map(|(a, xi)| {
            let d = a - lambda;
            xi * xi / (d * d)
        })
        .sum()
}

/// Root of the increasing function `confocal_value` inside `(lo, hi)`.
fn confocal_root(axes: &[f64], x: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= ELLIPTIC_TOL {
            break;
        }
        if confocal_value(axes, x, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Newton polish, never leaving the bracket.
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..3 {
        let f = confocal_value(axes, x, lambda);
        let df = confocal_slope(axes, x, lambda);
        if f == 0.0 || !df.is_finite() || df == 0.0 {
            break;
        }
        let next = lambda - f / df;
        if !(next > lo && next < hi) {
            break;
        }
        lambda = next;
    }
    lambda
}

pub fn elliptic_coords(spec: &EllipsoidSpec, x: &[f64]) -> Result<EllipticCoords> {
    check_len(spec.len(), x.len())?;
    if !spec.is_distinct() {
        return Err(Error::SymmetricChart);
    }
    if let Some(index) = x.iter().position(|xi| *xi == 0.0) {
        return Err(Error::DegenerateChart { index });
    }
    let axes = spec.axes();
    let order = spec.sorted_order();
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let mut lower = axes[order[0]] - norm2 - 1.0;
    let mut lambda = Vec::with_capacity(order.len());
    for &k in &order {
        let upper = axes[k];
        lambda.push(confocal_root(axes, x, lower, upper));
        lower = upper;
    }
    let signs = x.iter().map(|v| if *v < 0.0 { -1 } else { 1 }).collect();
    Ok(EllipticCoords { lambda, signs })
}

pub fn coords_from_elliptic(spec: &EllipsoidSpec, ec: &EllipticCoords) -> Result<Vec<f64>> {
    check_len(spec.len(), ec.lambda.len())?;
    check_len(spec.len(), ec.signs.len())?;
    if !spec.is_distinct() {
        return Err(Error::SymmetricChart);
    }
    let axes = spec.axes();
    let order = spec.sorted_order();
    let mut below = f64::NEG_INFINITY;
    for (pos, &k) in order.iter().enumerate() {
        let l = ec.lambda[pos];
        if !(l >= below && l <= axes[k]) || (pos > 0 && l < ec.lambda[pos - 1]) {
            return Err(Error::InvalidCoords { index: pos });
        }
        below = axes[k];
    }
    Ok((0..axes.len())
        .map(|k| {
            let ak = axes[k];
            let num: f64 = ec.lambda.iter().map(|l| ak - l).product();
            let den: f64 = axes
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, ai)| ak - ai)
                .product();
            let sign = if ec.signs[k] < 0 { -1.0 } else { 1.0 };
            sign * (num / den).max(0.0).sqrt()
        })
        .collect())
}

/// `Q_η(u, v) = Σ u_i v_i / (η - a_i)`.
pub fn quadric_form(axes: &[f64], eta: f64, u: &[f64], v: &[f64]) -> f64 {
    crate::linalg::q_form(eta, axes, u, v)
}

/// `(Q_η(x,x) + 1)(Q_η(y,y) + σ) - Q_η(x,y)²`.
///
/// For `σ = 0` this vanishes iff the line `x + s y` touches the confocal
/// quadric `Q_η`; for `σ ≠ 0` iff the conic traced by `ẍ = -σ x` from
/// `(x, y)` does.
pub fn tangency_value(axes: &[f64], x: &[f64], y: &[f64], eta: f64, sigma: f64) -> Result<f64> {
    check_len(axes.len(), x.len())?;
    check_len(axes.len(), y.len())?;
    check_pole(eta, axes)?;
    let qxx = quadric_form(axes, eta, x, x);
    let qyy = quadric_form(axes, eta, y, y);
    let qxy = quadric_form(axes, eta, x, y);
    Ok((qxx + 1.0) * (qyy + sigma) - qxy * qxy)
}

/// Kinetic-metric and potential values of the reduced system on `P^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectiveMetric {
    pub metric: f64,
    pub potential: f64,
}

/// `<u, A v̄>`.
fn herm_a(axes: &[f64], u: &[Complex64], v: &[Complex64]) -> Complex64 {
    axes.iter().zip(u.iter().zip(v)).map(|(a, (ui, vi))| ui * vi.conj() * a).sum()
}

pub fn projective_metric_eval(
    axes: &[f64],
    w: &[Complex64],
    tangent: &[Complex64],
    sigma: f64,
) -> Result<ProjectiveMetric> {
    check_len(axes.len(), w.len())?;
    check_len(axes.len(), tangent.len())?;
    let ww: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if ww == 0.0 {
        return Err(Error::ZeroVector);
    }
    let waw = herm_a(axes, w, w).re;
    let xax = herm_a(axes, tangent, tangent).re;
    let xaw = herm_a(axes, tangent, w);
    let wax = herm_a(axes, w, tangent);
    let metric = (waw * xax - (xaw * wax).re) / (waw * ww);
    Ok(ProjectiveMetric { metric, potential: sigma * waw / (2.0 * ww) })
}
