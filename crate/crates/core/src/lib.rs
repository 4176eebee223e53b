//! Riesz transforms `∇(-Δ)^{-1/2}` on weighted graphs that discretize
//! Riemannian manifolds, cylinders over them, and manifolds glued from
//! cylinders along a torus backbone.
//!
//! The crate provides the constructions, spectral and semigroup functional
//! calculus, `L^p` operator-norm lower bounds, continuous-time random walks,
//! and scripted numerical experiments built from them.

pub mod cylinder;
pub mod experiments;
pub mod error;
pub mod field;
pub mod glue;
pub mod io;
pub mod manifold;
pub mod norms;
pub mod quadrature;
pub mod riesz;
pub mod rng;
pub mod semigroup;
pub mod spectral;
pub mod walk;

pub use cylinder::{build_cylinder, AxisBoundary, CylinderGraph};
pub use error::{Error, Result};
pub use field::{GradientMagnitudeField, ScalarField};
pub use glue::{glue, BridgePolicy, Component, GlueOptions, GluedManifold};
pub use manifold::{build_cycle, build_path, build_torus, product, WeightedGraphManifold};
pub use norms::{lp_norm, op_norm_lower_bound, riesz_norm, EstimatorOptions, OperatorNormEstimate};
pub use riesz::{gradient_magnitude, rescaled_riesz, riesz_transform, Restriction};
pub use spectral::{decompose, heat_semigroup, inv_sqrt_spectral, solve_poisson, SpectralDecomposition};
