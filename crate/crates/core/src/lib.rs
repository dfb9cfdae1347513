//! Numerical laboratory for Morrey–Campanato, BMO, Sobolev and fractional
//! Gagliardo functionals on uniform grids, and a harness that checks
//! Sobolev–Campanato interpolation inequalities by ratio reports.

pub mod ball;
pub mod config;
pub mod derivative;
pub mod error;
pub mod grid;
pub mod harness;
pub mod pointwise;
pub mod polyfit;
pub mod reduce;
pub mod seminorms;

pub use error::{Error, Result};
