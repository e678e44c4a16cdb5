use nalgebra::DMatrix;

use super::integrator::{integrate, IntegratorConfig, OdeSystem};
use crate::error::{Error, Result};
use crate::ion::Hamiltonian;
use crate::quantum::{identity, lowering_op, raising_op, tensor, DensityMatrix, Operator, ProductSpace, Space, SparseOp};
use crate::C64;

/// Motional heating at `n_dot` quanta per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingChannel {
    rate: f64,
}

impl HeatingChannel {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param("heating_rate", format!("must be finite and >= 0, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn none() -> Self {
        Self { rate: 0.0 }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Jump operators `√ṅ a†` and `√ṅ a` (high-temperature bath), which give
/// `d⟨N⟩/dt = ṅ` for any state away from the truncation edge.
pub fn heating_collapse_ops(ch: HeatingChannel, space: &ProductSpace) -> Vec<Operator> {
    let g = ch.rate.sqrt();
    let id = identity(space.spin.clone());
    vec![
        tensor(&id, &raising_op(space.fock)).scale(g),
        tensor(&id, &lowering_op(space.fock)).scale(g),
    ]
}

/// Hamiltonian plus collapse operators.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: Hamiltonian,
    collapse_ops: Vec<Operator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Hamiltonian, collapse_ops: Vec<Operator>) -> Result<Self> {
        let d = hamiltonian.dim();
        if let Some(op) = collapse_ops.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: op.dim(),
            });
        }
        Ok(Self {
            hamiltonian,
            collapse_ops,
        })
    }

    pub fn unitary(hamiltonian: Hamiltonian) -> Self {
        Self {
            hamiltonian,
            collapse_ops: Vec::new(),
        }
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[Operator] {
        &self.collapse_ops
    }
}

struct Drive {
    v: SparseOp,
    v_dag: SparseOp,
    freq: f64,
}

/// `dρ/dt = Kρ + ρK† + Σ LρL†` with `K = −iH − ½ Σ L†L`.
pub(crate) struct LindbladRhs {
    dim: usize,
    k0: SparseOp,
    drives: Vec<Drive>,
    jumps: Vec<SparseOp>,
}

impl LindbladRhs {
    pub(crate) fn new(model: &LindbladModel) -> Self {
        let h = model.hamiltonian.static_part().matrix();
        let d = h.nrows();
        let mut k = h * C64::new(0.0, -1.0);
        for l in &model.collapse_ops {
            let m = l.matrix();
            k -= (m.adjoint() * m) * C64::new(0.5, 0.0);
        }
        Self {
            dim: d,
            k0: SparseOp::from_dense(&k),
            drives: model
                .hamiltonian
                .oscillating()
                .iter()
                .map(|o| Drive {
                    v: SparseOp::from_dense(o.op.matrix()),
                    v_dag: SparseOp::from_dense(&o.op.matrix().adjoint()),
                    freq: o.angular_freq,
                })
                .filter(|d| !d.v.is_zero())
                .collect(),
            jumps: model
                .collapse_ops
                .iter()
                .map(|l| SparseOp::from_dense(l.matrix()))
                .filter(|s| !s.is_zero())
                .collect(),
        }
    }
}

impl OdeSystem for LindbladRhs {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let one = C64::new(1.0, 0.0);
        let mi = C64::new(0.0, -1.0);
        self.k0.mul_left_acc(one, rho, out);
        self.k0.mul_right_adjoint_acc(one, rho, out);
        for d in &self.drives {
            let c = C64::from_polar(1.0, -d.freq * t);
            drive_terms(mi * c, rho, out, &d.v);
            drive_terms(mi * c.conj(), rho, out, &d.v_dag);
        }
        if !self.jumps.is_empty() {
            let mut tmp = vec![C64::new(0.0, 0.0); rho.len()];
            for l in &self.jumps {
                tmp.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                l.mul_right_adjoint_acc(one, rho, &mut tmp);
                l.mul_left_acc(one, &tmp, out);
            }
        }
    }

    fn drift(&self, rho: &[C64]) -> f64 {
        let tr: C64 = (0..self.dim).map(|i| rho[i * self.dim + i]).sum();
        (tr - C64::new(1.0, 0.0)).norm()
    }
}

/// Adds `αSρ + ρ(αS)†` for one piece of an oscillating drive.
fn drive_terms(alpha: C64, rho: &[C64], out: &mut [C64], s: &SparseOp) {
    s.mul_left_acc(alpha, rho, out);
    s.mul_right_adjoint_acc(alpha.conj(), rho, out);
}

/// Integrate the master equation from `rho0` at `t = 0`; one state per
/// entry of `times`.
pub fn evolve_lindblad(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<DensityMatrix>> {
    let d = model.hamiltonian.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.dim(),
        });
    }
    let rhs = LindbladRhs::new(model);
    let space = Space::Product(model.hamiltonian.space().clone());
    let raw = integrate(&rhs, rho0.matrix().as_slice(), times, cfg)?;
    raw.into_iter()
        .zip(times)
        .map(|(y, &t)| {
            let drift = rhs.drift(&y);
            DensityMatrix::from_evolved(space.clone(), DMatrix::from_vec(d, d, y)).map_err(|e| Error::Integration {
                t,
                reason: e.to_string(),
                trace_drift: drift,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagate::unitary_propagator;
    use crate::ion::{effective_space, effective_two_level_hamiltonian};
    use crate::quantum::{thermal_density, MeanPhonon};
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    #[test]
    fn zero_rate_gives_zero_ops() {
        let sp = effective_space(5).unwrap();
        let ops = heating_collapse_ops(HeatingChannel::none(), &sp);
        assert_eq!(ops.len(), 2);
        assert!(ops.iter().all(|o| o.max_abs() == 0.0));
        assert!(HeatingChannel::new(-1.0).is_err());
    }

    #[test]
    fn frozen_without_dynamics() {
        let sp = effective_space(4).unwrap();
        let h = effective_two_level_hamiltonian(0.0, 0.0, 1e5, 0.0, &sp, false).unwrap();
        let rho0 = thermal_density(0.7, &sp).unwrap();
        let out = evolve_lindblad(&LindbladModel::unitary(h), &rho0, &[0.0, 1e-3, 5e-3], &IntegratorConfig::default()).unwrap();
        for rho in out {
            assert!((rho.matrix() - rho0.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn resonant_carrier_rabi() {
        let sp = effective_space(1).unwrap();
        let omega = 5e3;
        let h = effective_two_level_hamiltonian(0.0, omega, 4e5, 0.0, &sp, false).unwrap();
        let rho0 = thermal_density(0.0, &sp).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 1e-5).collect();
        let out = evolve_lindblad(&LindbladModel::unitary(h), &rho0, &times, &IntegratorConfig::default()).unwrap();
        for (t, rho) in times.iter().zip(&out) {
            let p = rho.level_population("D").unwrap();
            let want = (TAU * omega * t / 2.0).sin().powi(2);
            assert!((p - want).abs() < 1e-6, "t={t}: {p} vs {want}");
        }
    }

    #[test]
    fn matches_matrix_exponential() {
        let sp = effective_space(1).unwrap();
        let h = effective_two_level_hamiltonian(0.0, 3e3, 4e5, 1.1e3, &sp, false).unwrap();
        let rho0 = thermal_density(0.0, &sp).unwrap();
        let t = 7.3e-4;
        let cfg = IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..IntegratorConfig::default()
        };
        let out = evolve_lindblad(&LindbladModel::unitary(h.clone()), &rho0, &[t], &cfg).unwrap();
        let u = unitary_propagator(h.static_part(), t);
        let want = &u * rho0.matrix() * u.adjoint();
        let dev = (out[0].matrix() - want).camax();
        assert!(dev < 1e-8, "{dev}");
    }

    #[test]
    fn heating_from_vacuum() {
        let sp = effective_space(30).unwrap();
        let h = effective_two_level_hamiltonian(0.0, 0.0, 4e5, 0.0, &sp, false).unwrap();
        let ch = HeatingChannel::new(41.0).unwrap();
        let model = LindbladModel::new(h, heating_collapse_ops(ch, &sp)).unwrap();
        let rho0 = thermal_density(0.0, &sp).unwrap();
        let out = evolve_lindblad(&model, &rho0, &[5e-3, 10e-3], &IntegratorConfig::default()).unwrap();
        assert_relative_eq!(out[1].mean_phonon(), 0.41, max_relative = 0.02);
        assert!((out[1].trace().re - 1.0).abs() < 1e-8);
        // the symmetric bath keeps a thermal state thermal: p_n = q^n/(n̄+1)
        let p = out[1].fock_populations().unwrap();
        let nb = out[1].mean_phonon();
        assert_relative_eq!(p.p(1) / p.p(0), nb / (nb + 1.0), max_relative = 1e-5);
    }

    #[test]
    fn heating_gains_one_phonon_in_24ms() {
        let sp = effective_space(40).unwrap();
        let h = effective_two_level_hamiltonian(0.0, 0.0, 4e5, 0.0, &sp, false).unwrap();
        let model = LindbladModel::new(h, heating_collapse_ops(HeatingChannel::new(41.0).unwrap(), &sp)).unwrap();
        let rho0 = thermal_density(0.13, &sp).unwrap();
        let out = evolve_lindblad(&model, &rho0, &[24e-3], &IntegratorConfig::default()).unwrap();
        assert!((out[0].mean_phonon() - 1.13).abs() < 0.03, "{}", out[0].mean_phonon());
    }
}
