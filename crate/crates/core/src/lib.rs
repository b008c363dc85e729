//! Numerical toolkit for averaging operators along plane curves with a
//! one-parameter family of dilations: curve conditions, exponent-plane
//! regions, sampled operators, oscillatory symbols and scaling experiments.

pub mod averaging;
pub mod cli;
pub mod curves;
pub mod error;
pub mod fit;
pub mod jet;
pub mod oscillatory;
pub mod pq_geometry;
pub mod sampling;
pub mod sharpness;

pub use error::{Error, Result};
