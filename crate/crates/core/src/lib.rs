pub mod conditions;
pub mod config;
pub mod corpus;
pub mod curvature;
pub mod curve;
pub mod error;
pub mod quad;
pub mod region;
pub mod run;
pub mod surface;
pub mod variation;

pub use error::{Error, Result};
