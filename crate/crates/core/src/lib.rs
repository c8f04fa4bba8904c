pub mod bmo;
pub mod clifford;
pub mod dilation;
pub mod doi;
pub mod error;
pub mod harness;
pub mod matcore;
pub mod symbols;
pub mod tolerance;

pub use error::{Error, Result};
