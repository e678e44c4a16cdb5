//! Sideband thermometry: the thermal sideband transfer formula, parameter
//! fits and unit conversions.

mod conversions;
mod fit;
mod sideband;

pub use conversions::{doppler_limit, noise_density};
pub use fit::{
    fit_heating_rate, fit_nbar_flop, fit_nbar_spectra, minimize_scalar, FitOptions, FitResult, HeatingRateFit, ScalarMinimum,
    SpectraFixed,
};
pub use sideband::{eq_cutoff, ratio_to_nbar, sideband_probability, SidebandRatio, TAIL_LIMIT};
