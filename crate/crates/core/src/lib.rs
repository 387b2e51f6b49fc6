//! Canham-Helfrich energy minimization on triangulated surfaces with clamped
//! boundary data, together with oriented-varifold diagnostics: energy lower
//! bounds, curvature concentration, density ratios, diameter estimates, a
//! clamped-plate comparison solver and lower-semicontinuity experiments.

pub mod analysis;
pub mod axisym;
pub mod boundary;
pub mod cli;
pub mod diffgeo;
pub mod energy;
pub mod error;
pub mod mesh;
pub mod optimizer;
pub mod scalar;
pub mod varifold;

pub use error::{Error, Result};
