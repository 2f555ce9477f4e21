//! Three-species food chain with swappable saturating functional responses:
//! equilibria, stability, bifurcation thresholds in the top-predator
//! mortality, trajectory simulation, limit cycles and their continuation,
//! chaos detection, and response-to-response least-squares fitting.

pub mod bifurcation;
pub mod cubic;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod fitting;
pub mod model;
pub mod response;
mod serde_util;
pub mod solve;

pub use error::{Error, Result};
pub use model::{holling_table1, ivlev_table2, CharCoeffs, ModelParams, State};
pub use response::{ResponseKind, ResponseSpec, AXIOM_GRID};
