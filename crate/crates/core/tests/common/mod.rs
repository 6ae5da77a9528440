#![allow(dead_code)]

use confocal::dynamics::SystemSpec;
use confocal::EllipsoidSpec;

pub fn spec(axes: &[f64]) -> EllipsoidSpec {
    EllipsoidSpec::new(axes.to_vec()).unwrap()
}

pub const AXES4: [f64; 4] = [1.0, 1.7, 2.6, 3.9];

pub fn jacobi(sigma: f64) -> SystemSpec {
    SystemSpec::jacobi(spec(&AXES4), sigma).unwrap()
}

pub fn jr() -> SystemSpec {
    SystemSpec::jacobi_rosochatius(spec(&AXES4), 0.6, vec![0.2, 0.0, 0.35, 0.1]).unwrap()
}

pub fn double(sigma: f64) -> SystemSpec {
    SystemSpec::double_jacobi(spec(&AXES4), sigma).unwrap()
}

pub fn complex(sigma: f64) -> SystemSpec {
    SystemSpec::complex_jacobi(spec(&[1.0, 2.0, 3.5]), sigma).unwrap()
}

pub fn hierarchy(m: usize) -> SystemSpec {
    let sigmas = [0.4, 0.3, -0.2][..m].to_vec();
    SystemSpec::separable(spec(&AXES4), sigmas, vec![0.0, 0.2, 0.3, 0.0]).unwrap()
}

/// Symmetric ellipsoid with two groups of two equal axes.
pub fn symmetric_jr() -> SystemSpec {
    SystemSpec::jacobi_rosochatius(spec(&[1.2, 1.2, 2.5, 2.5]), 0.3, vec![0.15, 0.25, 0.1, 0.2]).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}
