pub mod analytic;
pub mod config;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod sim;
pub mod specfun;
pub mod surrogate;

pub use error::{Error, ErrorKind, Result};
