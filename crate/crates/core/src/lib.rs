pub mod combinatorics;
pub mod eppf;
pub mod error;
pub mod levy;
pub mod quadrature;
pub mod samplers;
pub mod structural;
pub mod verification;

pub use error::{Error, Result};
