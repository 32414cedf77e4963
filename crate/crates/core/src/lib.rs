pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod geodesy;
pub mod geom;
pub mod ingest;
pub mod mesh;
pub mod meshops;
pub mod pointcloud;
pub mod pipeline;
pub mod poisson;
pub mod survey_sim;
pub mod volume;

pub use error::{Error, Result};
