use super::PhaseState;
use crate::error::{check_len, Error, Result};
use crate::geometry::EllipsoidSpec;
use crate::linalg::{central_gradient, inv_pow_dot};

/// Relative step of the central differences used for bracket gradients.
pub const GRADIENT_STEP: f64 = 1e-6;

/// Coordinate brackets on `T*E^n`:
/// `{x_i, x_j} = 0`, `{x_i, y_j} = xy[i][j]`, `{y_i, y_j} = yy[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracTensor {
    pub xy: Vec<Vec<f64>>,
    pub yy: Vec<Vec<f64>>,
}

impl DiracTensor {
    pub fn at(spec: &EllipsoidSpec, x: &[f64], y: &[f64]) -> Result<Self> {
        let a = spec.axes();
        check_len(a.len(), x.len())?;
        check_len(a.len(), y.len())?;
        let w = inv_pow_dot(a, 2, x, x);
        if w <= 0.0 {
            return Err(Error::MultiplierSingular { value: w });
        }
        let n = a.len();
        let mut xy = vec![vec![0.0; n]; n];
        let mut yy = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let d = a[i] * a[j] * w;
                xy[i][j] = f64::from(u8::from(i == j)) - x[i] * x[j] / d;
                yy[i][j] = -(x[i] * y[j] - x[j] * y[i]) / d;
            }
        }
        Ok(DiracTensor { xy, yy })
    }

    pub fn dim(&self) -> usize {
        self.xy.len()
    }

    /// `Π ∇f` as a flat `(x, y)` vector, i.e. `({z_a, f})_a`.
    pub fn apply(&self, grad: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let (gx, gy) = grad.split_at(n);
        let mut out = vec![0.0; 2 * n];
        for i in 0..n {
            // {x_i, f} = Σ_j xy[i][j] ∂_{y_j} f
            out[i] = (0..n).map(|j| self.xy[i][j] * gy[j]).sum();
            // {y_i, f} = -Σ_j xy[j][i] ∂_{x_j} f + Σ_j yy[i][j] ∂_{y_j} f
            out[n + i] = (0..n).map(|j| -self.xy[j][i] * gx[j] + self.yy[i][j] * gy[j]).sum();
        }
        out
    }

    /// `{f, g}_D` from the two gradients.
    pub fn contract(&self, grad_f: &[f64], grad_g: &[f64]) -> f64 {
        let pg = self.apply(grad_g);
        grad_f.iter().zip(&pg).map(|(a, b)| a * b).sum()
    }
}

fn on_manifold(spec: &EllipsoidSpec, s: &PhaseState, ctol: f64) -> Result<()> {
    let a = spec.axes();
    let f1 = inv_pow_dot(a, 1, &s.x, &s.x) - 1.0;
    let f2 = inv_pow_dot(a, 1, &s.x, &s.y);
    if !(f1.abs() <= ctol) {
        return Err(Error::ConstraintViolation { name: "F1", residual: f1, tol: ctol });
    }
    if !(f2.abs() <= ctol) {
        return Err(Error::ConstraintViolation { name: "F2", residual: f2, tol: ctol });
    }
    Ok(())
}

/// `{f, g}_D` at `s`, with `f`, `g` evaluated on the flat vector `(x, y)`
/// and differentiated by central differences.
pub fn dirac_bracket<F, G>(spec: &EllipsoidSpec, f: &F, g: &G, s: &PhaseState, ctol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
    G: Fn(&[f64]) -> f64 + ?Sized,
{
    on_manifold(spec, s, ctol)?;
    let tensor = DiracTensor::at(spec, &s.x, &s.y)?;
    let z = s.flat();
    let gf = central_gradient(f, &z, GRADIENT_STEP);
    let gg = central_gradient(g, &z, GRADIENT_STEP);
    Ok(tensor.contract(&gf, &gg))
}

/// `X_f = Π_D ∇f` at `s`, flat `(x, y)` layout.
pub fn hamiltonian_vector_field<F>(spec: &EllipsoidSpec, f: &F, s: &PhaseState, ctol: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    on_manifold(spec, s, ctol)?;
    let tensor = DiracTensor::at(spec, &s.x, &s.y)?;
    Ok(tensor.apply(&central_gradient(f, &s.flat(), GRADIENT_STEP)))
}
