/// Fundamental constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Bohr magneton, J/T.
    pub bohr_magneton: f64,
    /// Elementary charge, C.
    pub electron_charge: f64,
    /// Atomic mass unit, kg.
    pub atomic_mass_unit: f64,
}

/// CODATA 2018 recommended values.
pub const CODATA: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    bohr_magneton: 9.274_010_078_3e-24,
    electron_charge: 1.602_176_634e-19,
    atomic_mass_unit: 1.660_539_066_60e-27,
};

/// Natural linewidth Γ/2π of the Yb⁺ ²S₁/₂ ↔ ²P₁/₂ cooling transition, Hz.
pub const YB_P12_LINEWIDTH_HZ: f64 = 19.6e6;
