//! Lasserre-type sum-of-squares bounds for polynomial minimization.

pub mod cheb;
pub mod error;
pub mod grid;
pub mod lab;
pub mod linalg;
pub mod lower;
pub mod measures;
pub mod orthopoly;
pub mod poly;
pub mod sdp;
pub mod upper;

pub use error::{Error, Result};
pub use poly::{Exponent, Polynomial};
