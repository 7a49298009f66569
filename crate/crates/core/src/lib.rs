//! Mixed-correlated ARFIMA (MC-ARFIMA) bivariate processes.
//!
//! Simulation of bivariate series built from fractionally integrated,
//! AR(1) and white-noise components with contemporaneously correlated
//! innovations; their theoretical exponents, cross-correlation function
//! and cross spectrum; and DFA, DCCA and HXA estimators of the univariate
//! and bivariate Hurst exponents.

pub mod config;
pub mod error;
pub mod estimators;
pub mod fir;
pub mod harness;
pub mod innovations;
pub mod models;
pub mod output;
pub mod report;

pub use error::{Error, Result};
