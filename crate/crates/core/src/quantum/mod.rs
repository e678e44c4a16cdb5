//! Operator algebra on a finite spin manifold tensored with a truncated
//! harmonic-oscillator (Fock) space.
//!
//! Product-space ordering is spin-major: the basis vector `|s, n⟩` lives at
//! index `s * fock.dim() + n`. This ordering is part of the public contract
//! so that serialized matrices stay portable.

mod basis;
mod distribution;
mod operator;
mod sparse;
mod state;

pub use basis::{FockBasis, ProductSpace, Space, SpinBasis};
pub use distribution::{mean_phonon, thermal_distribution, thermal_tail_cutoff, FockDistribution, MeanPhonon};
pub use operator::{
    identity, lowering_op, number_op, projector, raising_op, spin_transition, tensor, Operator,
};
pub use sparse::SparseOp;
pub use state::{expectation, thermal_density, DensityMatrix, Ket, QuantumState, Tolerances};
