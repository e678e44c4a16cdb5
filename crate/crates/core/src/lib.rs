//! Simulation and analysis toolkit for RF-driven sideband cooling of a
//! trapped ion in a static magnetic-field gradient.
//!
//! The crate is layered bottom-up:
//!
//! * [`quantum`]: operators and states on a spin manifold tensored with a
//!   truncated Fock space (spin-major ordering).
//! * [`ion`]: physical configuration, the effective Lamb-Dicke parameter and
//!   the dressed / effective two-level Hamiltonians.
//! * [`dynamics`]: unitary and Lindblad time evolution, flop curves and
//!   frequency scans.
//! * [`cooling`]: pulsed sideband-cooling schedules and the population
//!   rate-map simulator.
//! * [`thermometry`]: analytic sideband transfer, mean-phonon fits,
//!   heating-rate regression and noise-density conversion.
//! * [`io`]: configuration files, CSV schemas, run manifests and the
//!   command implementations behind the `ioncool` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cooling;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod ion;
pub mod quantum;
pub mod thermometry;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
