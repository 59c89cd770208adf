pub mod error;
pub mod inequalities;
pub mod io;
pub mod lp;
pub mod measure;
pub mod metrics;
pub mod processes;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
