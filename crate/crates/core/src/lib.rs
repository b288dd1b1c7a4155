//! Numerical checks of level-set characterizations of L^p and Sobolev norms:
//! difference-quotient level-set measures, weak-L^p profiles, Gagliardo
//! seminorms, limit extrapolation and Littlewood-Paley machinery.

pub mod asymptotics;
pub mod error;
pub mod fields;
pub mod measure;
pub mod norms;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
