pub mod copula;
pub mod expansion;
pub mod error;
pub mod expr;
pub mod gauss;
pub mod harness;
pub mod limits;
pub mod quad;
pub mod schedule;
pub mod sum;

pub use error::{Error, Result};
