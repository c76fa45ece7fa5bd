//! Ensembles, protein contact networks and batch commands built on
//! [`mlnet_core`].

pub mod commands;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod output;
pub mod protein;
pub mod svg;

pub use error::{Error, Result};
pub use mlnet_core as core;
