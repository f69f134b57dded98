//! Simulation and diagnostics for the two-dimensional Vlasov–Navier–Stokes
//! system on the periodic unit torus.

pub mod corpus;
pub mod coupled;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod maximal;
pub mod norms;
pub mod ns;
pub mod particles;
pub mod scheme;
pub mod spectral;

pub use error::{Error, Result};
