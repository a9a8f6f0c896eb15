//! Riemannian geometry of knotted magnetic flux tubes and reduced kinematic
//! dynamo solutions.
//!
//! The crate is organised bottom-up:
//!
//! - [`curve`]: parametric space curves, arclength, finite-difference Frenet frames
//! - [`shape`] and [`metric`]: shape functions, the non-orthogonal tube triad and its metric
//! - [`rrc`]: rotation coefficients, the stretching term and the unstretching ratio
//! - [`quadrature`] and [`energy`]: deterministic quadrature, surface volumes and knot energy
//! - [`dynamo`]: resonance, radius profiles, field solutions and residual checks
//! - [`cli`]: configuration and the `fluxknot` command-line entry point

// Negated float comparisons are deliberate: they reject NaN together with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curve;
pub mod dynamo;
pub mod energy;
pub mod error;
pub mod metric;
pub mod quadrature;
pub mod rrc;
pub mod shape;

pub use error::{Error, Result};
