//! Physical configuration of the ¹⁷¹Yb⁺ ion and the Hamiltonians that
//! couple its internal levels to the axial mode through a static
//! magnetic-field gradient.
//!
//! Frequencies in configuration structs are cyclic (Hz). Hamiltonians are
//! returned in angular units, `H/ħ` in rad/s.

mod constants;
mod dressed;
mod hamiltonian;
mod params;

pub use constants::{PhysicalConstants, CODATA, YB_P12_LINEWIDTH_HZ};
pub use dressed::{dressed_states, dressing_hamiltonian, DressedStates};
pub use hamiltonian::{
    build_dressed_rf_hamiltonian, effective_space, effective_two_level_hamiltonian, full_space,
    DressedOptions, Hamiltonian, OscillatingTerm, Resonance,
};
pub use params::{
    ground_state_extent, lamb_dicke_eff, sideband_rabi, DriveField, DriveKind, IonLevels, Sideband,
    TrapParams,
};

/// Spin labels of the bare four-level manifold, in basis order.
pub const FULL_LEVELS: [&str; 4] = ["0", "-1", "0'", "+1"];

/// Spin labels of the effective two-level system `{|0'⟩, |D⟩}`.
pub const EFFECTIVE_LEVELS: [&str; 2] = ["0'", "D"];
