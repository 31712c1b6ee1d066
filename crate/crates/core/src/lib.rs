//! Standing waves `psi = e^{i lambda t} u(x)` of the one-dimensional equation
//! `i psi_t + psi_xx + f(x, |psi|^2) psi = 0` with a saturating, spatially
//! decaying nonlinearity.
//!
//! The pipeline runs from the structural audit of `f` ([`model`]) through the
//! bifurcation frequency ([`linearization`]), single waves ([`stationary`]) and
//! the whole branch ([`curve`]) to the spectral ([`spectral`]) and dynamical
//! ([`dynamics`]) stability checks, plus the optical reading of the branch
//! ([`waveguide`]). [`cli`] exposes every stage as a subcommand.

pub mod cli;
pub mod config;
pub mod curve;
pub mod discretization;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod linearization;
pub mod model;
pub mod spectral;
pub mod stationary;
pub mod waveguide;
