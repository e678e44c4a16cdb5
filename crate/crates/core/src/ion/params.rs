use std::f64::consts::TAU;

use super::constants::CODATA;
use crate::error::{Error, Result};

/// Trap and gradient configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    /// Ion mass in atomic mass units.
    pub mass_amu: f64,
    /// Axial secular frequency ν_z/2π, Hz.
    pub nu_z: f64,
    /// Static field gradient ∂_zB, T/m.
    pub gradient: f64,
    /// Field offset at the ion, gauss.
    pub b_offset: f64,
}

impl TrapParams {
    pub fn new(mass_amu: f64, nu_z: f64, gradient: f64, b_offset: f64) -> Result<Self> {
        let tp = Self {
            mass_amu,
            nu_z,
            gradient,
            b_offset,
        };
        tp.validate()?;
        Ok(tp)
    }

    pub fn validate(&self) -> Result<()> {
        positive("mass_amu", self.mass_amu)?;
        positive("nu_z", self.nu_z)?;
        positive("b_offset", self.b_offset)?;
        // zero gradient is allowed: it simply switches the coupling off
        if !(self.gradient >= 0.0) || !self.gradient.is_finite() {
            return Err(Error::param("gradient", format!("must be finite and >= 0, got {}", self.gradient)));
        }
        Ok(())
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_amu * CODATA.atomic_mass_unit
    }

    pub fn angular_nu_z(&self) -> f64 {
        TAU * self.nu_z
    }
}

impl Default for TrapParams {
    fn default() -> Self {
        Self {
            mass_amu: 171.0,
            nu_z: 426.7e3,
            gradient: 23.6,
            b_offset: 10.5,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Zeeman structure of the ²S₁/₂ ground state. Splittings are inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct IonLevels {
    /// First-order splitting of the F=1 sublevels, Hz.
    pub zeeman_splitting: f64,
    /// Amount by which `|0'⟩↔|−1⟩` lies above `|0'⟩↔|+1⟩`, Hz.
    pub second_order_splitting: f64,
    pub labels: [String; 4],
}

impl IonLevels {
    pub fn validate(&self) -> Result<()> {
        positive("zeeman_splitting", self.zeeman_splitting)?;
        if !(self.second_order_splitting >= 0.0) {
            return Err(Error::param("second_order_splitting", "must be >= 0"));
        }
        Ok(())
    }
}

impl Default for IonLevels {
    fn default() -> Self {
        Self {
            zeeman_splitting: 14.6e6,
            second_order_splitting: 34e3,
            labels: super::FULL_LEVELS.map(String::from),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    MicrowaveDressing,
    RfProbe,
}

/// A coherent drive. `rabi_freq` and `detuning` are cyclic (Hz); the
/// detuning is field minus transition frequency for `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveField {
    pub kind: DriveKind,
    pub rabi_freq: f64,
    pub detuning: f64,
    pub phase: f64,
    /// (lower, upper) level labels.
    pub target: (String, String),
}

impl DriveField {
    pub fn dressing(upper: &str, rabi_freq: f64) -> Self {
        Self {
            kind: DriveKind::MicrowaveDressing,
            rabi_freq,
            detuning: 0.0,
            phase: 0.0,
            target: ("0".into(), upper.into()),
        }
    }

    pub fn probe(rabi_freq: f64, detuning: f64) -> Self {
        Self {
            kind: DriveKind::RfProbe,
            rabi_freq,
            detuning,
            phase: 0.0,
            target: ("0'".into(), "+1".into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_freq >= 0.0) || !self.rabi_freq.is_finite() {
            return Err(Error::param("rabi_freq", format!("must be >= 0, got {}", self.rabi_freq)));
        }
        if !self.detuning.is_finite() || !self.phase.is_finite() {
            return Err(Error::param("detuning", "must be finite"));
        }
        Ok(())
    }
}

/// Motional sideband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sideband {
    /// `|0',n⟩ → |D,n−1⟩`
    Red,
    /// `|0',n⟩ → |D,n+1⟩`
    Blue,
}

impl Sideband {
    /// Sign of the probe detuning at which this sideband is resonant.
    pub fn detuning_sign(self) -> f64 {
        match self {
            Sideband::Red => -1.0,
            Sideband::Blue => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sideband::Red => "red",
            Sideband::Blue => "blue",
        }
    }
}

impl std::str::FromStr for Sideband {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(Sideband::Red),
            "blue" => Ok(Sideband::Blue),
            other => Err(Error::param("sideband", format!("expected `red` or `blue`, got `{other}`"))),
        }
    }
}

/// Ground-state wavepacket extent `z₀ = √(ħ / 2mω_z)`, m.
pub fn ground_state_extent(tp: &TrapParams) -> Result<f64> {
    positive("mass_amu", tp.mass_amu)?;
    positive("nu_z", tp.nu_z)?;
    Ok((CODATA.hbar / (2.0 * tp.mass_kg() * tp.angular_nu_z())).sqrt())
}

/// Gradient-induced Lamb-Dicke parameter `η = z₀ μ_B ∂_zB / ħω_z`.
pub fn lamb_dicke_eff(tp: &TrapParams) -> Result<f64> {
    tp.validate()?;
    let z0 = ground_state_extent(tp)?;
    Ok(z0 * CODATA.bohr_magneton * tp.gradient / (CODATA.hbar * tp.angular_nu_z()))
}

/// First-order sideband Rabi frequency (Hz) for `|0',n⟩` given the carrier
/// Rabi frequency `omega` (Hz). A red sideband from `n = 0` is zero.
pub fn sideband_rabi(n: usize, sign: Sideband, eta: f64, omega: f64) -> f64 {
    let k = match sign {
        Sideband::Red => n as f64,
        Sideband::Blue => (n + 1) as f64,
    };
    eta * omega * k.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn extent_for_default_trap() {
        let z0 = ground_state_extent(&TrapParams::default()).unwrap();
        // √(ħ / (2 · 171 u · 2π · 426.7 kHz)), evaluated by hand
        let m = 171.0 * 1.660_539_066_60e-27;
        let w = 2.0 * std::f64::consts::PI * 426.7e3;
        let oracle = (1.054_571_817e-34 / (2.0 * m * w)).sqrt();
        assert_relative_eq!(z0, oracle, max_relative = 1e-14);
        assert!((z0 - 8.3e-9).abs() < 0.05e-9, "z0 = {z0}");
    }

    #[test]
    fn extent_scalings() {
        let tp = TrapParams::default();
        let z0 = ground_state_extent(&tp).unwrap();
        let heavy = TrapParams { mass_amu: 4.0 * tp.mass_amu, ..tp };
        let stiff = TrapParams { nu_z: 4.0 * tp.nu_z, ..tp };
        assert_relative_eq!(ground_state_extent(&heavy).unwrap(), z0 / 2.0, max_relative = 1e-14);
        assert_relative_eq!(ground_state_extent(&stiff).unwrap(), z0 / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn extent_rejects_nonpositive() {
        let tp = TrapParams { mass_amu: 0.0, ..TrapParams::default() };
        assert!(ground_state_extent(&tp).is_err());
        let tp = TrapParams { nu_z: -1.0, ..TrapParams::default() };
        assert!(ground_state_extent(&tp).is_err());
    }

    #[test]
    fn lamb_dicke_default() {
        let eta = lamb_dicke_eff(&TrapParams::default()).unwrap();
        assert!((eta - 0.0064).abs() < 0.0002, "eta = {eta}");
    }

    #[test]
    fn lamb_dicke_gradient_linear() {
        let tp = TrapParams::default();
        let eta = lamb_dicke_eff(&tp).unwrap();
        assert_eq!(lamb_dicke_eff(&TrapParams { gradient: 0.0, ..tp }).unwrap(), 0.0);
        let doubled = lamb_dicke_eff(&TrapParams { gradient: 2.0 * tp.gradient, ..tp }).unwrap();
        assert_relative_eq!(doubled, 2.0 * eta, max_relative = 1e-14);
    }

    #[test]
    fn lamb_dicke_frequency_power_law() {
        let tp = TrapParams::default();
        let eta = lamb_dicke_eff(&tp).unwrap();
        for f in [0.25, 0.5, 2.0, 3.7] {
            let e = lamb_dicke_eff(&TrapParams { nu_z: f * tp.nu_z, ..tp }).unwrap();
            assert_relative_eq!(e, eta * f64::powf(f, -1.5), max_relative = 1e-12);
        }
    }

    #[test]
    fn sideband_rabi_values() {
        let r = sideband_rabi(1, Sideband::Red, 0.0064, 61.2e3);
        assert_relative_eq!(r, 391.68, max_relative = 1e-12);
        assert_eq!(sideband_rabi(0, Sideband::Red, 0.0064, 61.2e3), 0.0);
        assert_eq!(
            sideband_rabi(0, Sideband::Blue, 0.0064, 61.2e3),
            sideband_rabi(1, Sideband::Red, 0.0064, 61.2e3)
        );
        assert_relative_eq!(
            sideband_rabi(4, Sideband::Red, 0.01, 1.0),
            0.02,
            max_relative = 1e-14
        );
    }
}
