//! Design and verification toolkit for passivity-constrained, multi-band
//! stiffness control of a cable-driven series elastic actuator.

pub mod error;
pub mod loops;
pub mod repro;
pub mod lti;
pub mod sea;
pub mod sim;
pub mod specs;
pub mod synth;

pub use error::{Error, Result};
