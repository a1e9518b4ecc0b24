//! Digital nets, Haar and Walsh analysis of the discrepancy function, and discrepancy
//! norms with their explicit bounds.

pub mod badic;
pub mod bounds;
pub mod digitalnet;
pub mod error;
pub mod generators;
pub mod gfpoly;
pub mod haar;
pub(crate) mod linalg;
pub mod norms;
pub mod pointset;
pub mod walsh;

pub use error::{Error, Result};
pub use pointset::{PointSet, Provenance};
