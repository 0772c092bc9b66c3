//! Numerical convex geometry of log-concave functions.
//!
//! The crate computes the first variation
//! `δ(f,g) = lim_{t→0⁺} (∫ f⋆(t·g) − ∫ f) / t`
//! of integrals of log-concave functions `f = e^{−φ}` two independent ways:
//! from the sup-convolution curve itself ([`variation::integral_curve`],
//! [`variation::delta_limit`]) and from the pair of surface area measures
//! `μ_f = (∇φ)♯(f dx)`, `ν_f = (n_{K_f})♯(f dH^{n−1}|∂K_f)` via
//! `δ(f,g) = ∫h_g dμ_f + ∫h_{K_g} dν_f` ([`variation::delta_measure_formula`]).
//!
//! Supporting modules provide convex bodies ([`bodies`]), potentials and
//! log-concave functions ([`convex`]), the measures ([`measures`]),
//! quadrature ([`quadrature`]) and anisotropic total variation ([`tv`]).

pub mod bodies;
pub mod convex;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod tv;
pub mod variation;

pub use bodies::ConvexBody;
pub use convex::{LogConcaveFn, Potential, QuadratureSpec};
pub use error::{Error, Result};
pub use measures::DiscreteMeasure;
