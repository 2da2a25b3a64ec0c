//! Quantitative convergence bounds for Markov chains.
//!
//! Exact analysis of finite chains (stationary laws, eigenvalue bounds,
//! minorization constants, exact total variation), numerical verification of
//! drift and minorization conditions for kernels on the real line, the
//! coupling bounds built from those conditions, and Monte Carlo simulation of
//! the couplings themselves.

pub mod bounds;
pub mod coupling;
pub mod error;
pub mod finite_chain;
pub mod interval;
pub mod kernels;
pub mod parallel;
pub mod presets;
pub mod quadrature;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
pub use parallel::Execution;
pub use rational::Rational;
