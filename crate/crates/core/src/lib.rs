//! Desk-scale computation of character-sum statistics for high-order
//! Dirichlet characters: level sets, mean squares of power sums, maximal
//! (Polya-Vinogradov) sums, pretentious distances, the Dickman rho
//! function, and the cyclic-group sumset combinatorics behind them.

pub mod addcomb;
pub mod arith;
pub mod character;
pub mod dickman;
pub mod error;
pub mod experiments;
pub mod multfun;

pub use error::{Error, Result};
