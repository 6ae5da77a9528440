//! Integrable flows on ellipsoids: the Jacobi and Jacobi-Rosochatius
//! problems, their separable-potential perturbations, Lax representations
//! with a spectral parameter, and the associated billiards.

pub mod billiard;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod lax;
pub mod linalg;
pub mod potentials;
pub mod sampling;

pub use error::{Error, Result};
pub use geometry::EllipsoidSpec;
