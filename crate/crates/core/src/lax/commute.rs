use nalgebra::DMatrix;
use serde::Serialize;

use super::integrals::{integral_value, IntegralId};
use crate::dynamics::{dirac_bracket, hamiltonian_vector_field, PhaseState, SystemSpec};
use crate::error::Result;

pub type CommutationPair = (IntegralId, IntegralId);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketRecord {
    pub pair: String,
    pub value: f64,
}

fn pairs_in(g: &[usize]) -> Vec<(usize, usize)> {
    let mut out = vec![];
    for (p, &i) in g.iter().enumerate() {
        for &j in &g[p + 1..] {
            out.push((i, j));
        }
    }
    out
}

/// Every pair whose Dirac bracket vanishes for the Jacobi-Rosochatius
/// problem (and its separable perturbations) on a possibly symmetric
/// ellipsoid: the central functions `f̃_s`, `P_s` against everything,
/// pair integrals from different groups, and the nested chains `L_{s,k}`.
pub fn listed_pairs(sys: &SystemSpec) -> Vec<CommutationPair> {
    use IntegralId::*;
    let groups = sys.spec.partition();
    let r = groups.len();
    let nontrivial: Vec<usize> = (0..r).filter(|&s| groups[s].len() >= 2).collect();
    let pij: Vec<IntegralId> = (0..r)
        .flat_map(|s| pairs_in(&groups[s]).into_iter().map(move |(i, j)| Pij { s, i, j }))
        .collect();
    let mut out = vec![];
    for s1 in 0..r {
        for s2 in s1 + 1..r {
            out.push((FTilde(s1), FTilde(s2)));
        }
        for &s2 in &nontrivial {
            out.push((FTilde(s1), PS(s2)));
        }
        for p in &pij {
            out.push((FTilde(s1), *p));
        }
    }
    for (a, &s1) in nontrivial.iter().enumerate() {
        for &s2 in &nontrivial[a + 1..] {
            out.push((PS(s1), PS(s2)));
        }
        for p in &pij {
            out.push((PS(s1), *p));
        }
    }
    for (a, p) in pij.iter().enumerate() {
        for q in &pij[a + 1..] {
            if let (Pij { s: s1, .. }, Pij { s: s2, .. }) = (p, q) {
                if s1 != s2 {
                    out.push((*p, *q));
                }
            }
        }
    }
    let chains: Vec<(usize, usize)> = (0..r).flat_map(|s| (1..groups[s].len()).map(move |k| (s, k))).collect();
    for (a, &(s1, k1)) in chains.iter().enumerate() {
        for &(s2, k2) in &chains[a + 1..] {
            out.push((L { s: s1, k: k1 }, L { s: s2, k: k2 }));
        }
        for (i, j) in pairs_in(&groups[s1][..=k1]) {
            out.push((Pij { s: s1, i, j }, L { s: s1, k: k1 }));
        }
    }
    out
}

/// `|{F, G}_D|` for each requested pair at `s`.
pub fn commutation_suite(sys: &SystemSpec, s: &PhaseState, pairs: &[CommutationPair]) -> Result<Vec<BracketRecord>> {
    pairs
        .iter()
        .map(|(a, b)| {
            let fa = |z: &[f64]| integral_value(sys, *a, z).unwrap_or(f64::NAN);
            let fb = |z: &[f64]| integral_value(sys, *b, z).unwrap_or(f64::NAN);
            // surface argument errors before differentiating
            integral_value(sys, *a, &s.flat())?;
            integral_value(sys, *b, &s.flat())?;
            let v = dirac_bracket(&sys.spec, &fa, &fb, s, sys.ctol)?;
            Ok(BracketRecord { pair: format!("{{{a}, {b}}}"), value: v.abs() })
        })
        .collect()
}

/// Numeric dimensions of the spans of Hamiltonian vector fields
/// `F = <X_f̃_s, X_P_{s,ij}>` and `K = <X_f̃_s, X_P_s>`, against the
/// generic values `2n - r - ρ` and `r + ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rank_f: usize,
    pub rank_k: usize,
    pub expected_f: usize,
    pub expected_k: usize,
}

impl RankReport {
    pub fn matches(&self) -> bool {
        self.rank_f == self.expected_f && self.rank_k == self.expected_k
    }
}

pub const RANK_THRESHOLD: f64 = 1e-7;

fn numeric_rank(cols: &[Vec<f64>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i]);
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|v| **v > RANK_THRESHOLD * max).count()
}

pub fn rank_dimensions(sys: &SystemSpec, s: &PhaseState) -> Result<RankReport> {
    let groups = sys.spec.partition();
    let field = |id: IntegralId| -> Result<Vec<f64>> {
        let f = |z: &[f64]| integral_value(sys, id, z).unwrap_or(f64::NAN);
        hamiltonian_vector_field(&sys.spec, &f, s, sys.ctol)
    };
    let mut ft = vec![];
    let mut ps = vec![];
    let mut pij = vec![];
    for (si, g) in groups.iter().enumerate() {
        ft.push(field(IntegralId::FTilde(si))?);
        if g.len() >= 2 {
            ps.push(field(IntegralId::PS(si))?);
        }
        for (i, j) in pairs_in(g) {
            pij.push(field(IntegralId::Pij { s: si, i, j })?);
        }
    }
    let n = sys.spec.len() - 1;
    let r = groups.len() - 1;
    let rho = sys.spec.nontrivial_groups();
    Ok(RankReport {
        rank_f: numeric_rank(&[ft.clone(), pij].concat()),
        rank_k: numeric_rank(&[ft, ps].concat()),
        expected_f: 2 * n - r - rho,
        expected_k: r + rho,
    })
}
