use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};

use super::params::{DriveField, IonLevels};
use crate::error::{Error, Result};
use crate::quantum::{Ket, Operator, SpinBasis};
use crate::C64;

/// Eigenstates of the resonant, equal-amplitude dressing of `|0⟩↔|±1⟩`.
///
/// With dressing Rabi frequency Ω_dr the dark state `|D⟩` has energy 0 and
/// the bright pair `(|B⟩ ± |0⟩)/√2`, `|B⟩ = (|+1⟩+|−1⟩)/√2`, sits at
/// `±Ω_dr/√2`.
#[derive(Debug, Clone)]
pub struct DressedStates {
    pub basis: SpinBasis,
    pub dark: Ket,
    pub bright_upper: Ket,
    pub bright_lower: Ket,
}

impl DressedStates {
    /// Angular energy of the upper bright state for dressing Rabi `rabi` (Hz).
    pub fn bright_shift(rabi: f64) -> f64 {
        TAU * rabi * FRAC_1_SQRT_2
    }
}

pub fn dressed_states(levels: &IonLevels) -> Result<DressedStates> {
    let basis = SpinBasis::new(levels.labels.iter().cloned())?;
    let i0 = basis.index_of("0")?;
    let ip = basis.index_of("+1")?;
    let im = basis.index_of("-1")?;
    let ket = |amps: [(usize, f64); 3]| {
        let mut v = DVector::zeros(basis.dim());
        for (i, a) in amps {
            v[i] += C64::new(a, 0.0);
        }
        Ket::new(basis.clone(), v)
    };
    let s = FRAC_1_SQRT_2;
    Ok(DressedStates {
        dark: ket([(ip, s), (im, -s), (i0, 0.0)])?,
        bright_upper: ket([(ip, 0.5), (im, 0.5), (i0, s)])?,
        bright_lower: ket([(ip, 0.5), (im, 0.5), (i0, -s)])?,
        basis,
    })
}

/// Rotating-frame dressing Hamiltonian on the bare spin basis (rad/s).
/// Each field couples `|0⟩` to its upper level; its detuning appears as
/// `−δ` on that level.
pub fn dressing_hamiltonian(basis: &SpinBasis, fields: &[DriveField]) -> Result<Operator> {
    let d = basis.dim();
    let mut m = DMatrix::zeros(d, d);
    for f in fields {
        f.validate()?;
        let lo = basis.index_of(&f.target.0)?;
        let hi = basis.index_of(&f.target.1)?;
        if lo == hi {
            return Err(Error::param("target", "drive must couple two distinct levels"));
        }
        let c = C64::from_polar(TAU * f.rabi_freq / 2.0, f.phase);
        m[(hi, lo)] += c;
        m[(lo, hi)] += c.conj();
        m[(hi, hi)] += C64::new(-TAU * f.detuning, 0.0);
    }
    Operator::new(basis.clone(), m)
}
