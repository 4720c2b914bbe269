pub mod checks;
pub mod collocation;
pub mod error;
pub mod jets;
pub mod model;
pub mod oracle_fd;
pub mod series;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
