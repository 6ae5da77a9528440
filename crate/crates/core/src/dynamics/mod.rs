//! Continuous flows: the Jacobi problem and its double, complex,
//! Rosochatius and separable-potential variants, plus the free-space
//! oscillator that governs billiard segments.

mod dirac;
mod flows;
mod integrate;
mod reduction;

pub use dirac::{dirac_bracket, hamiltonian_vector_field, DiracTensor, GRADIENT_STEP};
pub use flows::{constraint_residuals, energy, rhs, rhs_unchecked, reparametrized_rhs, Velocity};
pub use integrate::{integrate, integrate_with, project, rk4_step, IntegrateOptions};
pub use reduction::{torus_reconstruct, torus_reduce, TorusReduction};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::EllipsoidSpec;
use crate::potentials::PotentialSpec;

pub const DEFAULT_CTOL: f64 = 1e-9;

/// Below this magnitude a coordinate carrying a Rosochatius constant is
/// treated as singular.
pub const SINGULAR_AXIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemKind {
    Jacobi,
    DoubleJacobi,
    ComplexJacobi,
    JacobiRosochatius,
    SeparableHierarchy,
    FreeOscillator,
    FreeJR,
}

impl SystemKind {
    pub const ALL: [SystemKind; 7] = [
        SystemKind::Jacobi,
        SystemKind::DoubleJacobi,
        SystemKind::ComplexJacobi,
        SystemKind::JacobiRosochatius,
        SystemKind::SeparableHierarchy,
        SystemKind::FreeOscillator,
        SystemKind::FreeJR,
    ];

    pub fn is_free(self) -> bool {
        matches!(self, SystemKind::FreeOscillator | SystemKind::FreeJR)
    }

    /// Number of position blocks of length `axes.len()` in the state.
    pub fn blocks(self) -> usize {
        match self {
            SystemKind::DoubleJacobi | SystemKind::ComplexJacobi => 2,
            _ => 1,
        }
    }

    /// Systems living on `T*E^n` in real coordinates `(x, y)`.
    pub fn is_real_ellipsoid(self) -> bool {
        matches!(
            self,
            SystemKind::Jacobi | SystemKind::JacobiRosochatius | SystemKind::SeparableHierarchy
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Jacobi => "jacobi",
            SystemKind::DoubleJacobi => "double-jacobi",
            SystemKind::ComplexJacobi => "complex-jacobi",
            SystemKind::JacobiRosochatius => "jacobi-rosochatius",
            SystemKind::SeparableHierarchy => "separable-hierarchy",
            SystemKind::FreeOscillator => "free-oscillator",
            SystemKind::FreeJR => "free-jr",
        }
    }
}

impl std::str::FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown system kind '{s}'")))
    }
}

/// A flow together with its parameters. For the free-space kinds `spec`
/// holds the billiard axes `a_1..a_n`; it only enters the Lax matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub spec: EllipsoidSpec,
    pub sigma: f64,
    pub sigmas: Vec<f64>,
    pub mu: Vec<f64>,
    pub ctol: f64,
}

impl SystemSpec {
    fn build(kind: SystemKind, spec: EllipsoidSpec, sigma: f64, sigmas: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let n = spec.len();
        let mu = if mu.is_empty() { vec![0.0; n] } else { mu };
        check_len(n, mu.len())?;
        if !sigma.is_finite() || sigmas.iter().chain(&mu).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("parameters must be finite".into()));
        }
        if kind == SystemKind::SeparableHierarchy && sigmas.is_empty() {
            return Err(Error::InvalidSpec("separable hierarchy needs at least one sigma_k".into()));
        }
        Ok(SystemSpec { kind, spec, sigma, sigmas, mu, ctol: DEFAULT_CTOL })
    }

    pub fn jacobi(spec: EllipsoidSpec, sigma: f64) -> Result<Self> {
        Self::build(SystemKind::Jacobi, spec, sigma, vec![], vec![])
    }

    pub fn double_jacobi(spec: EllipsoidSpec, sigma: f64) -> Result<Self> {
        Self::build(SystemKind::DoubleJacobi, spec, sigma, vec![], vec![])
    }

    pub fn complex_jacobi(spec: EllipsoidSpec, sigma: f64) -> Result<Self> {
        Self::build(SystemKind::ComplexJacobi, spec, sigma, vec![], vec![])
    }

    pub fn jacobi_rosochatius(spec: EllipsoidSpec, sigma: f64, mu: Vec<f64>) -> Result<Self> {
        Self::build(SystemKind::JacobiRosochatius, spec, sigma, vec![], mu)
    }

    /// `V = ½ Σ σ_k V^(k) + ½ Σ μ_i²/x_i²`. The Hook coefficient is `sigmas[0]`.
    pub fn separable(spec: EllipsoidSpec, sigmas: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let sigma = sigmas.first().copied().unwrap_or(0.0);
        Self::build(SystemKind::SeparableHierarchy, spec, sigma, sigmas, mu)
    }

    pub fn free_oscillator(axes: EllipsoidSpec, sigma: f64) -> Result<Self> {
        Self::build(SystemKind::FreeOscillator, axes, sigma, vec![], vec![])
    }

    pub fn free_jr(axes: EllipsoidSpec, sigma: f64, mu: Vec<f64>) -> Result<Self> {
        Self::build(SystemKind::FreeJR, axes, sigma, vec![], mu)
    }

    pub fn with_ctol(mut self, ctol: f64) -> Self {
        self.ctol = ctol;
        self
    }

    pub fn axes(&self) -> &[f64] {
        self.spec.axes()
    }

    /// Length of each of the state vectors `x` and `y`.
    pub fn state_len(&self) -> usize {
        self.spec.len() * self.kind.blocks()
    }

    /// Polynomial coefficients `σ_1..σ_m` of the potential, with the Hook
    /// term `σ` standing in for kinds that have no hierarchy.
    pub fn hierarchy_sigmas(&self) -> Vec<f64> {
        match self.kind {
            SystemKind::SeparableHierarchy => self.sigmas.clone(),
            _ => vec![self.sigma],
        }
    }

    pub fn potential(&self) -> PotentialSpec {
        PotentialSpec { sigmas: self.hierarchy_sigmas(), mu: self.mu.clone() }
    }

    pub fn has_mu(&self) -> bool {
        self.mu.iter().any(|m| *m != 0.0)
    }
}

/// A point of phase space. Block layouts by kind:
/// `DoubleJacobi`: `x = [x, ξ]`, `y = [y, η]`;
/// `ComplexJacobi`: `x = [Re z, Im z]`, `y = [Re p, Im p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        PhaseState { x, y, t: 0.0 }
    }

    pub fn double(x: &[f64], xi: &[f64], y: &[f64], eta: &[f64]) -> Self {
        PhaseState::new([x, xi].concat(), [y, eta].concat())
    }

    pub fn complex(z: &[Complex64], p: &[Complex64]) -> Self {
        let re = |v: &[Complex64]| v.iter().map(|c| c.re).collect::<Vec<_>>();
        let im = |v: &[Complex64]| v.iter().map(|c| c.im).collect::<Vec<_>>();
        PhaseState::new([re(z), im(z)].concat(), [re(p), im(p)].concat())
    }

    fn half(v: &[f64], second: bool) -> &[f64] {
        let n = v.len() / 2;
        if second {
            &v[n..]
        } else {
            &v[..n]
        }
    }

    /// `(x, ξ, y, η)` of a double-flow state.
    pub fn split_double(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        (
            Self::half(&self.x, false),
            Self::half(&self.x, true),
            Self::half(&self.y, false),
            Self::half(&self.y, true),
        )
    }

    /// `(z, p)` of a complex-flow state.
    pub fn split_complex(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let join = |v: &[f64]| {
            let n = v.len() / 2;
            (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect::<Vec<_>>()
        };
        (join(&self.x), join(&self.y))
    }

    pub fn check_len(&self, sys: &SystemSpec) -> Result<()> {
        check_len(sys.state_len(), self.x.len())?;
        check_len(sys.state_len(), self.y.len())
    }

    /// Concatenation `(x, y)`.
    pub fn flat(&self) -> Vec<f64> {
        [self.x.as_slice(), self.y.as_slice()].concat()
    }

    pub fn from_flat(z: &[f64], t: f64) -> Self {
        let n = z.len() / 2;
        PhaseState { x: z[..n].to_vec(), y: z[n..].to_vec(), t }
    }
}
