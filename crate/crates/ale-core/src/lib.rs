//! Numerical toolkit for cohomogeneity-one asymptotically locally Euclidean
//! (ALE) metrics: renormalized Perelman-type energies, ADM mass, their first
//! and second variations, divergence-free gauge fixing, indicial roots on
//! cones, Ricci flow monitoring and gradient-inequality experiments.
//!
//! Everything is reduced to radial profiles sampled on a geometric grid, so
//! the elliptic problems become banded one-dimensional systems that solve in
//! milliseconds while still exercising the full nonlinear structure of the
//! functionals.

pub mod calculus;
pub mod error;
pub mod flow;
pub mod gauge;
pub mod grid;
pub mod indicial;
pub mod link;
pub mod loja;
pub mod metric;
pub mod norms;
pub mod potential;
pub mod tensor;
pub mod variations;

pub use error::AleError;
pub use grid::RadialGrid;
pub use link::LinkGeometry;
pub use metric::{Family, MetricProfile};


pub use tensor::{RadialTwoTensor, TensorMode};

/// Uniform default for relative cross-check tolerances.
pub const REL_TOL: f64 = 1e-6;
/// Uniform default for absolute cross-check tolerances.
pub const ABS_TOL: f64 = 1e-9;

/// `|x - y|` measured against `max(|x|, |y|, floor)`.
pub fn rel_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs()).max(1e-300);
    (x - y).abs() / scale
}

/// Cross-check contract used throughout: relative `REL_TOL` or absolute
/// `ABS_TOL`, whichever is larger.
pub fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= ABS_TOL.max(REL_TOL * x.abs().max(y.abs()))
}
