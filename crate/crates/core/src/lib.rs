//! Linearised cavity optomechanics: normal modes, damped eigenvalues, output
//! noise spectra, dressed-state ladders and spectral peak fitting.
//!
//! Angular frequencies are in rad/s throughout; use [`params::hz`] to convert
//! from Hz.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod covariance;
pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod linalg;
pub mod normal_modes;
pub mod params;
pub mod spectrum;

pub use dynamics::{build_drift, damped_eigenvalues, DriftModel, EigenSet};
pub use error::{Error, Result};
pub use normal_modes::{damped_modes, symplectic_transform, undamped_frequencies, NormalModes};
pub use params::{DerivedRates, SystemParams, ZeroPointConvention};
pub use spectrum::{noise_power_spectrum, GridSpec, NoiseModel, SpectrumGrid};
