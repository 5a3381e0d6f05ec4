//! Fredholm integral equations of the first kind, solved by reformulation
//! into equations of the second kind, together with classical regularizing
//! baselines, reductions of boundary-value problems, and a residual-based
//! solvability filter.

pub mod baselines;
pub mod error;
pub mod expr;
pub mod fredholm2;
pub mod kernels;
pub mod linalg;
pub mod method_core;
pub mod numerics;
pub mod problems;
pub mod reduction2d;

pub use error::{Error, Result};
