pub mod compensated;
pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod fubini;
pub mod integral;
pub mod lattice;
pub mod prefix_tables;
pub mod quadrature;
pub mod report;
pub mod series;
pub mod successive;

pub use error::{Error, Result};
