//! Microscopic and macroscopic crowd models with massive agents: kernels,
//! measures, particle and continuum solvers, Wasserstein distances, and the
//! stationary and stability analyses built on them.

// `!(x > 0.0)` checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod convergence;
pub mod csvio;
pub mod desired;
pub mod error;
pub mod estimates;
pub mod exec;
pub mod kernel;
pub mod measure;
pub mod micro;
pub mod numerics;
pub mod rk;
pub mod simplex;
pub mod space;
pub mod stationary;
pub mod trajectory;
pub mod wasserstein;

pub use error::{Error, Result};
pub use exec::Execution;
