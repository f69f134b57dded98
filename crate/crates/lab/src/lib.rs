//! Configuration, experiment drivers and series I/O for the Vlasov–Navier–Stokes
//! simulator.

pub mod audit;
pub mod config;
pub mod error;
pub mod experiments;
pub mod series_file;

pub use error::{LabError, Result};
