use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::ion::CODATA;

/// Scaled electric-field noise `ν S_E(ν) = 4 ṅ ħ m ω_z² / e²` in V²m⁻² for
/// heating rate `n_dot` (1/s), axial frequency `nu_z` (Hz) and ion mass in u.
pub fn noise_density(n_dot: f64, nu_z: f64, mass_amu: f64) -> Result<f64> {
    if !(n_dot >= 0.0) || !n_dot.is_finite() {
        return Err(Error::param("n_dot", format!("must be finite and >= 0, got {n_dot}")));
    }
    for (name, v) in [("nu_z", nu_z), ("mass_amu", mass_amu)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::param(name, format!("must be > 0, got {v}")));
        }
    }
    let m = mass_amu * CODATA.atomic_mass_unit;
    let w = TAU * nu_z;
    Ok(4.0 * n_dot * CODATA.hbar * m * w * w / (CODATA.electron_charge * CODATA.electron_charge))
}

/// Doppler limit `n̄_D = Γ/(2ω_z) − ½` (clamped at 0), with natural linewidth
/// and trap frequency in Hz.
pub fn doppler_limit(linewidth: f64, nu_z: f64) -> Result<f64> {
    if !(linewidth >= 0.0) || !linewidth.is_finite() {
        return Err(Error::param("linewidth", format!("must be finite and >= 0, got {linewidth}")));
    }
    if !(nu_z > 0.0) || !nu_z.is_finite() {
        return Err(Error::param("nu_z", format!("must be > 0, got {nu_z}")));
    }
    Ok((linewidth / (2.0 * nu_z) - 0.5).max(0.0))
}
