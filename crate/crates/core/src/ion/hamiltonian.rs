use std::f64::consts::{SQRT_2, TAU};

use super::dressed::dressing_hamiltonian;
use super::params::{lamb_dicke_eff, DriveField, IonLevels, TrapParams};
use super::{EFFECTIVE_LEVELS, FULL_LEVELS};
use crate::error::{Error, Result};
use crate::quantum::{
    identity, lowering_op, number_op, projector, raising_op, spin_transition, tensor, FockBasis,
    Operator, ProductSpace, Space, SpinBasis,
};
use crate::C64;
use nalgebra::DMatrix;

/// A drive term `V e^{−iωt} + V† e^{iωt}` that could not be removed by the
/// frame choice.
#[derive(Debug, Clone)]
pub struct OscillatingTerm {
    pub op: Operator,
    /// ω in rad/s.
    pub angular_freq: f64,
}

/// `H(t)/ħ = H₀ + Σ_k (V_k e^{−iω_k t} + h.c.)` in rad/s.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    space: ProductSpace,
    static_part: Operator,
    oscillating: Vec<OscillatingTerm>,
}

impl Hamiltonian {
    pub fn new(space: ProductSpace, static_part: Operator, oscillating: Vec<OscillatingTerm>) -> Result<Self> {
        let d = space.dim();
        for op in std::iter::once(&static_part).chain(oscillating.iter().map(|o| &o.op)) {
            if op.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: op.dim(),
                });
            }
        }
        if !static_part.is_hermitian(1e-12) {
            return Err(Error::InvalidState("static Hamiltonian is not Hermitian".into()));
        }
        Ok(Self {
            space,
            static_part,
            oscillating,
        })
    }

    pub fn time_independent(space: ProductSpace, op: Operator) -> Result<Self> {
        Self::new(space, op, Vec::new())
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn static_part(&self) -> &Operator {
        &self.static_part
    }

    pub fn oscillating(&self) -> &[OscillatingTerm] {
        &self.oscillating
    }

    pub fn is_time_independent(&self) -> bool {
        self.oscillating.is_empty()
    }

    /// Full operator at time `t`.
    pub fn at(&self, t: f64) -> Operator {
        let mut h = self.static_part.clone();
        for term in &self.oscillating {
            let ph = C64::from_polar(1.0, -term.angular_freq * t);
            h = &h + &(&term.op.scale(ph) + &term.op.adjoint().scale(ph.conj()));
        }
        h
    }
}

/// Which transition a rotating-wave Hamiltonian keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resonance {
    Carrier,
    Red,
    Blue,
}

impl Resonance {
    /// Nearest resonance to probe detuning `delta` and the residual detuning
    /// from it (both Hz).
    pub fn nearest(delta: f64, nu_z: f64) -> (Resonance, f64) {
        let cands = [
            (Resonance::Carrier, delta),
            (Resonance::Red, delta + nu_z),
            (Resonance::Blue, delta - nu_z),
        ];
        cands
            .into_iter()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
    }
}

pub fn effective_space(n_max: usize) -> Result<ProductSpace> {
    Ok(ProductSpace::new(SpinBasis::new(EFFECTIVE_LEVELS)?, FockBasis::new(n_max)?))
}

pub fn full_space(n_max: usize) -> Result<ProductSpace> {
    Ok(ProductSpace::new(SpinBasis::new(FULL_LEVELS)?, FockBasis::new(n_max)?))
}

struct Lift<'a> {
    space: &'a ProductSpace,
    fock_id: Operator,
    spin_id: Operator,
}

impl<'a> Lift<'a> {
    fn new(space: &'a ProductSpace) -> Self {
        Self {
            space,
            fock_id: identity(space.fock),
            spin_id: identity(space.spin.clone()),
        }
    }

    fn spin(&self, op: &Operator) -> Operator {
        tensor(op, &self.fock_id)
    }

    fn fock(&self, op: &Operator) -> Operator {
        tensor(&self.spin_id, op)
    }

    fn transition(&self, to: &str, from: &str) -> Result<Operator> {
        Ok(self.spin(&spin_transition(&self.space.spin, to, from)?))
    }

    fn projector(&self, label: &str) -> Result<Operator> {
        Ok(self.spin(&projector(&self.space.spin, label)?))
    }
}

/// Direct dense assembly of real-amplitude terms `|s⟩⟨s'| ⊗ f(n)`; avoids
/// the full-size temporaries of operator algebra at large cutoffs.
struct Assembly<'a> {
    space: &'a ProductSpace,
    fock_dim: usize,
    m: DMatrix<C64>,
}

impl<'a> Assembly<'a> {
    fn new(space: &'a ProductSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            fock_dim: space.fock.dim(),
            m: DMatrix::zeros(d, d),
        }
    }

    fn diag(&mut self, s: usize, f: impl Fn(usize) -> f64) {
        for n in 0..self.fock_dim {
            let i = s * self.fock_dim + n;
            self.m[(i, i)] += C64::new(f(n), 0.0);
        }
    }

    /// `Σ_n c(n) |to, n+shift⟩⟨from, n| + h.c.`
    fn pair(&mut self, to: usize, from: usize, shift: isize, c: impl Fn(usize) -> f64) {
        for n in 0..self.fock_dim {
            let m = n as isize + shift;
            if m < 0 || m >= self.fock_dim as isize {
                continue;
            }
            let (i, j) = (to * self.fock_dim + m as usize, from * self.fock_dim + n);
            let v = C64::new(c(n), 0.0);
            self.m[(i, j)] += v;
            self.m[(j, i)] += v;
        }
    }

    fn finish(self, scale: f64) -> Result<Operator> {
        Operator::new(Space::Product(self.space.clone()), self.m * C64::new(scale, 0.0))
    }
}

fn hermitian_pair(op: &Operator) -> Operator {
    op + &op.adjoint()
}

/// Reduced `{|0'⟩, |D⟩} ⊗ Fock` model of an RF probe with carrier Rabi
/// frequency `omega` (Hz), first-order gradient coupling `eta`, probe
/// detuning `delta` (Hz) from the `|0'⟩↔|D⟩` carrier.
///
/// With `keep_carrier` the spin is in the probe frame and the motion in the
/// lab frame, so carrier and both sidebands are retained and `H` is still
/// time independent. Otherwise the motion is moved to its interaction
/// picture and only the nearest resonance is kept.
pub fn effective_two_level_hamiltonian(
    eta: f64,
    omega: f64,
    nu_z: f64,
    delta: f64,
    space: &ProductSpace,
    keep_carrier: bool,
) -> Result<Hamiltonian> {
    for (name, v) in [("eta", eta), ("omega", omega), ("nu_z", nu_z)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
        }
    }
    if space.spin.labels() != EFFECTIVE_LEVELS {
        return Err(Error::param("space", format!("expected spin levels {EFFECTIVE_LEVELS:?}")));
    }
    let mut h = Assembly::new(space);
    let (bright, dark) = (0, 1);
    let g = eta * omega / 2.0;
    if keep_carrier {
        h.diag(bright, |n| delta / 2.0 + n as f64 * nu_z);
        h.diag(dark, |n| -delta / 2.0 + n as f64 * nu_z);
        h.pair(dark, bright, 0, |_| omega / 2.0);
        h.pair(dark, bright, 1, |n| g * ((n + 1) as f64).sqrt());
        h.pair(dark, bright, -1, |n| -g * (n as f64).sqrt());
    } else {
        let (res, residual) = Resonance::nearest(delta, nu_z);
        h.diag(bright, |_| residual / 2.0);
        h.diag(dark, |_| -residual / 2.0);
        match res {
            Resonance::Carrier => h.pair(dark, bright, 0, |_| omega / 2.0),
            Resonance::Red => h.pair(dark, bright, -1, |n| -g * (n as f64).sqrt()),
            Resonance::Blue => h.pair(dark, bright, 1, |n| g * ((n + 1) as f64).sqrt()),
        }
    }
    let h = h.finish(TAU)?;
    Hamiltonian::time_independent(space.clone(), h)
}

/// Options for the four-level dressed model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedOptions {
    pub keep_carrier: bool,
    /// Include the probe's coupling of `|0'⟩↔|−1⟩`. Only representable
    /// (as an oscillating term) when the carrier frame is kept.
    pub include_minus_coupling: bool,
    /// Overrides the gradient-derived Lamb-Dicke parameter.
    pub eta: Option<f64>,
}

impl Default for DressedOptions {
    fn default() -> Self {
        Self {
            keep_carrier: false,
            include_minus_coupling: true,
            eta: None,
        }
    }
}

/// Four-level `{|0⟩,|−1⟩,|0'⟩,|+1⟩} ⊗ Fock` model with two resonant
/// microwave dressing fields and an RF probe on `|0'⟩↔|+1⟩`.
///
/// The probe's `rabi_freq` is the effective `|0'⟩↔|D⟩` carrier Rabi
/// frequency; the bare `|0'⟩↔|+1⟩` coupling is √2 larger because
/// `⟨D|+1⟩ = 1/√2`. The probe detuning is measured from the `|0'⟩↔|+1⟩`
/// (equivalently `|0'⟩↔|D⟩`) carrier.
///
/// The dressing fields close a loop with the two probe couplings, so the
/// `|0'⟩↔|−1⟩` term keeps a residual rotation at `2δ − s + δ₋` (s the
/// second-order splitting, δ₋ the `|−1⟩` dressing detuning). It is carried
/// as an [`OscillatingTerm`] in the carrier frame and dropped under RWA.
pub fn build_dressed_rf_hamiltonian(
    tp: &TrapParams,
    levels: &IonLevels,
    dressing: &[DriveField; 2],
    probe: &DriveField,
    space: &ProductSpace,
    opts: DressedOptions,
) -> Result<Hamiltonian> {
    levels.validate()?;
    probe.validate()?;
    for label in FULL_LEVELS {
        space.spin.index_of(label)?;
    }
    let eta = match opts.eta {
        Some(e) => e,
        None => lamb_dicke_eff(tp)?,
    };
    let nu = tp.nu_z;
    let l = Lift::new(space);
    let a = l.fock(&lowering_op(space.fock));
    let ad = l.fock(&raising_op(space.fock));
    let dress = l.spin(&dressing_hamiltonian(&space.spin, dressing)?);
    let bare = SQRT_2 * probe.rabi_freq;
    let phase = C64::from_polar(1.0, probe.phase);
    let up = l.transition("+1", "0'")?.scale(phase);
    let delta = probe.detuning;

    let mut oscillating = Vec::new();
    let h = if opts.keep_carrier {
        let motion = l.fock(&number_op(space.fock)) * nu;
        let dressing_frame = &dress * (1.0 / TAU);
        let lift = &(&ad - &a) * eta;
        let one = identity(Space::Product(space.clone()));
        let plus = hermitian_pair(&(&up * &(&one + &lift))) * (bare / 2.0);
        if opts.include_minus_coupling {
            let minus_detuning = dressing
                .iter()
                .find(|f| f.target.1 == "-1")
                .map_or(0.0, |f| f.detuning);
            let v = &(&l.transition("0'", "-1")?.scale(phase) * &(&one - &lift)) * (TAU * bare / 2.0);
            oscillating.push(OscillatingTerm {
                op: v,
                angular_freq: TAU * (2.0 * delta - levels.second_order_splitting + minus_detuning),
            });
        }
        &(&(&l.projector("0'")? * delta) + &motion) + &(&dressing_frame + &plus)
    } else {
        let (res, residual) = Resonance::nearest(delta, nu);
        let coupling = match res {
            Resonance::Carrier => hermitian_pair(&up) * (bare / 2.0),
            Resonance::Red => hermitian_pair(&(&up * &a)) * (-eta * bare / 2.0),
            Resonance::Blue => hermitian_pair(&(&up * &ad)) * (eta * bare / 2.0),
        };
        let dressing_frame = &dress * (1.0 / TAU);
        &(&(&l.projector("0'")? * residual) + &dressing_frame) + &coupling
    };
    Hamiltonian::new(space.clone(), h * TAU, oscillating)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion::{sideband_rabi, Sideband};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Operator-algebra construction of the effective model.
    fn lifted_effective(eta: f64, omega: f64, nu_z: f64, delta: f64, space: &ProductSpace, keep_carrier: bool) -> Operator {
    let l = Lift::new(space);
    let a = l.fock(&lowering_op(space.fock));
    let ad = l.fock(&raising_op(space.fock));
    let sz = &l.projector("0'").unwrap() - &l.projector("D").unwrap();
    let sp = l.transition("D", "0'").unwrap();

    let h = if keep_carrier {
        let motion = l.fock(&number_op(space.fock)) * nu_z;
        let carrier = hermitian_pair(&sp) * (omega / 2.0);
        let sideband = hermitian_pair(&(&sp * &(&ad - &a))) * (eta * omega / 2.0);
        &(&(&sz * (delta / 2.0)) + &motion) + &(&carrier + &sideband)
    } else {
        let (res, residual) = Resonance::nearest(delta, nu_z);
        let coupling = match res {
            Resonance::Carrier => hermitian_pair(&sp) * (omega / 2.0),
            Resonance::Red => hermitian_pair(&(&sp * &a)) * (-eta * omega / 2.0),
            Resonance::Blue => hermitian_pair(&(&sp * &ad)) * (eta * omega / 2.0),
        };
        &(&sz * (residual / 2.0)) + &coupling
    };
        h * TAU
    }

    #[test]
    fn assembly_matches_operator_algebra() {
        let space = effective_space(12).unwrap();
        for keep in [false, true] {
            for delta in [-4.1e5, -3e3, 2.5e3, 4.3e5] {
                let h = effective_two_level_hamiltonian(0.0064, 61.2e3, 426.7e3, delta, &space, keep).unwrap();
                let oracle = lifted_effective(0.0064, 61.2e3, 426.7e3, delta, &space, keep);
                let diff = (h.static_part().matrix() - oracle.matrix()).camax();
                assert!(diff < 1e-9 * oracle.max_abs(), "keep={keep} delta={delta} diff={diff}");
            }
        }
    }

    fn standard_dressing() -> [DriveField; 2] {
        [DriveField::dressing("+1", 32e3), DriveField::dressing("-1", 32e3)]
    }

    #[test]
    fn zero_drive_is_diagonal() {
        let sp = effective_space(6).unwrap();
        for keep in [false, true] {
            let h = effective_two_level_hamiltonian(0.0064, 0.0, 426.7e3, -426.7e3, &sp, keep).unwrap();
            let m = h.static_part().matrix();
            for i in 0..sp.dim() {
                for j in 0..sp.dim() {
                    if i != j {
                        assert_eq!(m[(i, j)].norm(), 0.0);
                    }
                }
            }
        }
        let fs = full_space(4).unwrap();
        let dressing = [DriveField::dressing("+1", 0.0), DriveField::dressing("-1", 0.0)];
        let h = build_dressed_rf_hamiltonian(
            &TrapParams::default(),
            &IonLevels::default(),
            &dressing,
            &DriveField::probe(0.0, 1e3),
            &fs,
            DressedOptions { keep_carrier: true, include_minus_coupling: false, eta: None },
        )
        .unwrap();
        let m = h.static_part().matrix();
        assert!((0..fs.dim()).all(|i| (0..fs.dim()).all(|j| i == j || m[(i, j)].norm() == 0.0)));
    }

    #[test]
    fn nearest_resonance() {
        assert_eq!(Resonance::nearest(-426.0e3, 426.7e3).0, Resonance::Red);
        assert_eq!(Resonance::nearest(427.0e3, 426.7e3).0, Resonance::Blue);
        assert_eq!(Resonance::nearest(1.0e3, 426.7e3).0, Resonance::Carrier);
        let (_, r) = Resonance::nearest(-425.7e3, 426.7e3);
        assert_relative_eq!(r, 1.0e3, max_relative = 1e-9);
    }

    #[test]
    fn resonant_red_block_gap() {
        // eigen-gap of the {|0',1⟩, |D,0⟩} block equals η Ω (angular)
        let sp = effective_space(5).unwrap();
        let (eta, omega, nu) = (0.0064, 61.2e3, 426.7e3);
        let h = effective_two_level_hamiltonian(eta, omega, nu, -nu, &sp, false).unwrap();
        let i = sp.index_of("0'", 1).unwrap();
        let j = sp.index_of("D", 0).unwrap();
        let m = h.static_part().matrix();
        let block = nalgebra::Matrix2::new(m[(i, i)], m[(i, j)], m[(j, i)], m[(j, j)]);
        let ev = block.symmetric_eigen().eigenvalues;
        let gap = (ev[0] - ev[1]).abs();
        assert_relative_eq!(gap, TAU * eta * omega, max_relative = 1e-3);
    }

    #[test]
    fn dressed_red_block_matches_sideband_rabi() {
        let tp = TrapParams::default();
        let eta = lamb_dicke_eff(&tp).unwrap();
        let fs = full_space(8).unwrap();
        let ds = crate::ion::dressed_states(&IonLevels::default()).unwrap();
        for keep in [false, true] {
            let h = build_dressed_rf_hamiltonian(
                &tp,
                &IonLevels::default(),
                &standard_dressing(),
                &DriveField::probe(61.2e3, -tp.nu_z),
                &fs,
                DressedOptions { keep_carrier: keep, include_minus_coupling: false, eta: None },
            )
            .unwrap();
            let m = h.static_part().matrix();
            for n in 1..=5usize {
                // ⟨D,n−1| H |0',n⟩ with |D⟩ projected from the bare basis
                let col = sp_col(&fs, m, "0'", n);
                let mut elem = C64::new(0.0, 0.0);
                for (k, label) in FULL_LEVELS.iter().enumerate() {
                    let amp = ds.dark.vector()[k];
                    elem += amp.conj() * col[fs.index_of(label, n - 1).unwrap()];
                }
                let want = TAU * sideband_rabi(n, Sideband::Red, eta, 61.2e3) / 2.0;
                assert_relative_eq!(elem.norm(), want, max_relative = 1e-12);
            }
        }
    }

    fn sp_col(fs: &ProductSpace, m: &nalgebra::DMatrix<C64>, label: &str, n: usize) -> Vec<C64> {
        let j = fs.index_of(label, n).unwrap();
        m.column(j).iter().copied().collect()
    }

    #[test]
    fn minus_coupling_only_with_carrier_frame() {
        let tp = TrapParams::default();
        let fs = full_space(3).unwrap();
        let mk = |keep| {
            build_dressed_rf_hamiltonian(
                &tp,
                &IonLevels::default(),
                &standard_dressing(),
                &DriveField::probe(61.2e3, -tp.nu_z),
                &fs,
                DressedOptions { keep_carrier: keep, include_minus_coupling: true, eta: None },
            )
            .unwrap()
        };
        assert!(mk(false).is_time_independent());
        let h = mk(true);
        assert_eq!(h.oscillating().len(), 1);
        assert_relative_eq!(
            h.oscillating()[0].angular_freq,
            TAU * (-2.0 * tp.nu_z - 34e3),
            max_relative = 1e-12
        );
        for t in [0.0, 1.3e-7, 4.2e-6] {
            assert!(h.at(t).is_hermitian(1e-12));
        }
    }

    proptest! {
        #[test]
        fn effective_is_hermitian(
            eta in 0.0f64..0.05, omega in 0.0f64..2e5, nu in 1e4f64..2e6,
            delta in -3e6f64..3e6, keep in any::<bool>(), n_max in 1usize..12,
        ) {
            let sp = effective_space(n_max).unwrap();
            let h = effective_two_level_hamiltonian(eta, omega, nu, delta, &sp, keep).unwrap();
            let m = h.static_part();
            prop_assert!(m.hermiticity_defect() <= 1e-12 * m.max_abs().max(1e-300));
        }

        #[test]
        fn dressed_is_hermitian(
            dr in 0.0f64..1e5, omega in 0.0f64..2e5, delta in -1e6f64..1e6,
            keep in any::<bool>(), minus in any::<bool>(), t in 0.0f64..1e-3, phase in -3.0f64..3.0,
        ) {
            let fs = full_space(3).unwrap();
            let mut probe = DriveField::probe(omega, delta);
            probe.phase = phase;
            let h = build_dressed_rf_hamiltonian(
                &TrapParams::default(),
                &IonLevels::default(),
                &[DriveField::dressing("+1", dr), DriveField::dressing("-1", dr)],
                &probe,
                &fs,
                DressedOptions { keep_carrier: keep, include_minus_coupling: minus, eta: None },
            ).unwrap();
            let m = h.at(t);
            prop_assert!(m.hermiticity_defect() <= 1e-12 * m.max_abs().max(1e-300));
        }
    }
}
