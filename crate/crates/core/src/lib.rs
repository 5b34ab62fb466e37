//! Non-uniform directed Physarum dynamics `ẋ = D(q(x) − x)` for positive
//! linear programs `min cᵀx s.t. Ax = b, x ≥ 0`, together with the tooling
//! to check its Lyapunov and boundedness properties numerically.
//!
//! - [`problem`]: instances, validation, graph builders.
//! - [`format`]: the `physarum-lp v1` text format.
//! - [`energy`]: minimum-energy solutions `q(x)` and potentials.
//! - [`dynamics`]: forward-Euler integration and flow fields.
//! - [`lyapunov`]: the Lyapunov function, barrier and trajectory audits.
//! - [`oracle`]: exhaustive basic-solution enumeration.
//! - [`analysis`]: entry direction of two-variable trajectories.
//! - [`experiments`] and [`output`]: the CLI experiments and their CSV files.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod format;
pub mod linalg;
pub mod lyapunov;
pub mod oracle;
pub mod output;
pub mod problem;
pub mod random;

pub use error::{Error, Result};
pub use problem::{DPolicy, PositiveLP, StateVector};
