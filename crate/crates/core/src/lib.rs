//! Secure distributed matrix multiplication from one-point algebraic geometry
//! codes on hyperelliptic curves `y^2 = f(x)`.
//!
//! The layers build on each other: [`field`] arithmetic, the [`function_field`]
//! of the curve, exact [`linalg`] over `F_q`, the [`scheme`] itself
//! (parameters, encoder, decoder), the simulated [`protocol`], and the
//! worker-count [`analysis`]. [`io`] holds the matrix file format.

pub mod analysis;
pub mod error;
pub mod field;
pub mod function_field;
pub mod io;
pub mod linalg;
pub mod protocol;
pub mod scheme;

pub use error::{Error, Result};
