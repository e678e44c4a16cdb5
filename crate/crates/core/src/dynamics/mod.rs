//! Unitary and master-equation time evolution, flop curves and spectra.

mod integrator;
mod lindblad;
mod propagate;
mod spectroscopy;

pub use integrator::{integrate, IntegratorConfig, Method, OdeSystem};
pub use lindblad::{evolve_lindblad, heating_collapse_ops, HeatingChannel, LindbladModel};
pub use propagate::{evolve_pure, unitary_propagator, EigenPropagator};
pub use spectroscopy::{
    dynamics_cutoff, f1_population, linear_grid, simulate_flop, simulate_scan, FlopResult, ModelKind,
    ProbeModel, Propagation, ResponseTable, ScanResult, Shots, SimOptions, DARK_LEVEL, TOP_LEVEL_LIMIT,
};
