//! Polarization correlations of multi-mode type-II parametric down-conversion
//! pumped by a plane wave.
//!
//! The crate is generic over the floating-point type through [`Real`]. The
//! `f64` aliases at the crate root are what most callers want.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crystal;
pub mod error;
pub mod farfield;
pub mod fockoracle;
pub mod gain;
pub mod pmcurves;
pub mod quadrature;
pub mod scalar;
pub mod stokes;

pub use error::{Error, Result};
pub use scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type SellmeierSet = crystal::SellmeierSet<f64>;
pub type CrystalConfig = crystal::CrystalConfig<f64>;
pub type DerivedScales = crystal::DerivedScales<f64>;
pub type Crystal = crystal::Crystal<f64>;
pub type GainSample = gain::GainSample<f64>;
pub type CompensationSpec = gain::CompensationSpec<f64>;
pub type FilterSpec = stokes::FilterSpec<f64>;
pub type Setup = stokes::Setup<f64>;
pub type FarFieldMap = farfield::FarFieldMap<f64>;
pub type MapGrid = farfield::MapGrid<f64>;
pub type PolarCurve = pmcurves::PolarCurve<f64>;
pub type EllipseLocus = pmcurves::EllipseLocus<f64>;
pub type ModePairGains = fockoracle::ModePairGains<f64>;
pub type TruncatedPairState = fockoracle::TruncatedPairState<f64>;
