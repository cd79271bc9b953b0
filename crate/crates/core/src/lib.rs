//! Additional-food predator–prey model with Holling type-III response.
//!
//! The crate covers the scaled vector field and its derivatives, equilibrium
//! location and classification, bifurcation detection and continuation,
//! parameter-plane atlases, time integration with invariant monitors, and
//! time-optimal control by direct multiple shooting.

pub mod bifurcation;
pub mod control;
pub mod equilibria;
pub mod error;
pub mod global;
pub mod model;
pub mod poly;
pub mod simulation;
pub mod suites;

pub use error::{Error, Result};
pub use model::{ModelParams, ParamName, State};
