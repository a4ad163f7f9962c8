//! Exact construction and verification of Gaussian maximum likelihood
//! estimators that are rational functions of the data.

pub mod catalog;
pub mod error;
pub mod graphs;
pub mod mldeg;
pub mod models;
pub mod numeric;
pub mod pde;
pub mod poly;
pub mod symcalc;

pub use error::{Error, Result};
