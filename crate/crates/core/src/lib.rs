pub mod corpus;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod eval;
pub mod nn;
pub mod repr;
pub mod synth;
pub mod typer;

pub use error::{Error, Result};
