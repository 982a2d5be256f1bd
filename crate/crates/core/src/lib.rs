//! Symbolic engine for ν-Grassmannians, super vector bundles over them, Gauss
//! supermatrices and classifying morphisms, with finite truncations of the
//! infinite towers.
//!
//! Everything is exact: even functions are reduced rational functions over
//! the rationals and odd generators are Grassmann symbols.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod error;

pub use error::{Error, Result};
pub mod nu;
pub mod supermatrix;
pub mod grassmannian;
pub mod bundle;
pub mod report;
pub mod sample;
pub mod fixtures;
pub mod gauss;
pub mod homotopy;
pub mod limits;
