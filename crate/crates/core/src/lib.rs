//! Arithmetic statistics of multi-quadratic covers of the projective line
//! over odd finite fields: exact enumeration of families, trace histograms,
//! the random model, Euler-product constants and exact census checks.

pub mod error;
pub mod euler;
pub mod family;
pub mod field;
pub mod model;
pub mod poly;
pub mod report;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
