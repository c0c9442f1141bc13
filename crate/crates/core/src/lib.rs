pub mod arith;
pub mod basis;
pub mod cli;
pub mod config;
pub mod dynsys;
pub mod error;
pub mod experiments;
pub mod factor;
pub mod fekete;
pub mod green;
pub mod heights;
pub mod homopoly;
pub mod linalg;
pub mod macaulay;
pub mod pf;
pub mod upoly;

pub use error::{Error, Result};
