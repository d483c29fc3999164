pub mod catalog;
pub mod deform;
pub mod diff;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod geometry;
pub mod linalg;
pub mod phi;
pub mod quad;
pub mod riemann;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;
