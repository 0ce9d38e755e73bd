//! Coupled porous/thin-channel flow on a reference domain, its thin-channel
//! limit, and numerical checks of the limit.

pub mod channel;
pub mod coefficients;
pub mod darcy;
pub mod epsilon;
pub mod error;
pub mod forcing;
pub mod geometry;
pub mod limit;
pub mod manufactured;
pub mod norms;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub mod lab;
