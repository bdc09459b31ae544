//! Spectral numerics for parabolic interval maps.
//!
//! This crate computes dynamical zeta functions, transfer-operator flat
//! traces and determinants, and spectral data for full-branch parabolic
//! maps of the unit interval, working through the induced (jump)
//! transformation, which is uniformly expanding with countably many full
//! branches. A Lindelöf contour integral continues the operator power
//! series beyond its natural disc of convergence.

pub mod cheb;
pub mod config;
pub mod continuation;
pub mod error;
pub mod induced;
pub mod jet;
pub mod maps;
pub mod operator;
pub mod potential;
pub mod quad;
pub mod solve;
pub mod spectral;
pub mod traces;
pub mod ulam;
pub mod tails;
pub mod words;

pub use error::{Error, Result};
pub use jet::Jet;
pub use maps::{BranchId, MapFamily, MapSpec, Smoothness};
pub use potential::{PotentialKind, PotentialSpec};
