//! Quasi-static simulation of everting vine robots with reconfigurable
//! pneumatic joints.

pub mod bench;
pub mod calibration;
pub mod equilibrium;
pub mod error;
pub mod growth;
pub mod mechanics;
pub mod plot;
pub mod protocol;
pub mod robot;
pub mod scenario;

pub use error::{Result, VineError};
