//! Equilibrium thermodynamics of multicomponent quantum mixtures built on a
//! hierarchy of reduced density matrices.
//!
//! The crate computes the kinetic parameter τ, internal energy and pressure
//! of uniform mixtures of fermions and bosons with arbitrary spin, and
//! numerically validates the structural identities behind those formulas:
//! exchange-cycle weights, the coefficient recursions of the exponential
//! distribution family, the reduction relation between distribution orders,
//! the resolvent equation on 1-D grids and the classical BBGKY limit.
//!
//! Data-parallel inner loops run on rayon when the `parallel` feature is
//! enabled (default); a sequential fallback is always available.

// Guards written as `!(x > 0.0)` are deliberate: they reject NaN together
// with the out-of-range sign, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exchange;
pub mod kernels;
pub mod ns;
pub mod numeric;
pub mod parallel;
pub mod thermo;
pub mod types;
pub mod validator;

pub use error::Error;
pub use types::{
    build_mixture, CorrelationModel, CorrelationSet, MixtureState, MultiIndex, PairPotential,
    PotentialForm, PotentialSet, SpeciesSpec, Statistics, UnitSystem,
};
