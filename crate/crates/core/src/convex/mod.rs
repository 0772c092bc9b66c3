//! Convex potentials φ and log-concave functions f = e^{−φ}.

mod conjugate;
mod envelope;
mod function;
mod grid;
mod integrate;
mod potential;
mod supconv;

pub use conjugate::{legendre_transform, legendre_transform_grid, support_function_of_function, SupportFn, SupportProvenance};
pub use envelope::{exponential_envelope, EnvelopeBound};
pub use function::LogConcaveFn;
pub use grid::{grid_conjugate, GridPotential, Lattice};
pub use integrate::{integrate, integrate_within, truncation_radius, QuadratureSpec};
pub use potential::{sample_points, Gradient, Potential};
pub use supconv::{grid_sup_convolve, sup_convolve, InfConv};

pub(crate) use integrate::Clipped;
pub(crate) use potential::min_convex_1d;
pub(crate) use supconv::as_quadratic;
