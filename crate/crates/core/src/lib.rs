//! Values of alternating quantum and distribution games.

pub mod dist;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod linops;
pub mod protocol;
pub mod quantum;

pub use error::{Error, Result};
