use super::rate_map::{CoolingResult, NbarPoint, OVERFLOW_LIMIT};
use super::schedule::{PulseKind, PulseSchedule, RepumpModel};
use crate::dynamics::{evolve_lindblad, heating_collapse_ops, HeatingChannel, IntegratorConfig, LindbladModel, ProbeModel, DARK_LEVEL};
use crate::error::{Error, Result};
use crate::ion::Hamiltonian;
use crate::quantum::{DensityMatrix, FockDistribution, MeanPhonon, Operator};

/// Master-equation version of the cooling sequence: every sideband pulse is
/// coherent evolution on the red sideband of `model`, every repump an ideal
/// projective reset of the spin to `|0'⟩` followed by heating over its
/// duration. The Fock cutoff is that of `dist0`.
pub fn simulate_cooling_quantum(
    dist0: &FockDistribution,
    schedule: &PulseSchedule,
    heating: HeatingChannel,
    repump: RepumpModel,
    model: &ProbeModel,
    cfg: &IntegratorConfig,
) -> Result<CoolingResult> {
    repump.validate()?;
    if repump.recoil_quanta > 0.0 {
        return Err(Error::param("recoil_quanta", "recoil is only modelled by the rate map"));
    }
    let space = model.space(dist0.n_max())?;
    let ops = heating_collapse_ops(heating, &space);
    let drive = LindbladModel::new(model.hamiltonian(-model.nu_z(), &space)?, ops.clone())?;
    let idle = LindbladModel::new(
        Hamiltonian::time_independent(space.clone(), Operator::zeros(space.clone()))?,
        ops,
    )?;
    let mut rho = DensityMatrix::spin_times_fock(&space, space.spin.index_of(DARK_LEVEL)?, dist0)?;
    let mut t = 0.0;
    let mut series = vec![NbarPoint {
        pulse_index: 0,
        nbar: rho.mean_phonon(),
        t_elapsed_s: 0.0,
    }];
    for (i, pulse) in schedule.pulses().iter().enumerate() {
        match pulse.kind {
            PulseKind::RedSideband => {
                rho = evolve_lindblad(&drive, &rho, &[pulse.duration], cfg)?.pop().expect("one output");
            }
            PulseKind::Repump => {
                rho = rho.reset_spin(DARK_LEVEL)?;
                if heating.rate() > 0.0 {
                    rho = evolve_lindblad(&idle, &rho, &[pulse.duration], cfg)?.pop().expect("one output");
                }
            }
        }
        t += pulse.duration;
        let top = *rho.fock_diagonal().last().expect("non-empty");
        if top > OVERFLOW_LIMIT {
            return Err(Error::Truncation(format!("after pulse {i}: top Fock bin holds {top:.3e}")));
        }
        series.push(NbarPoint {
            pulse_index: i + 1,
            nbar: rho.mean_phonon(),
            t_elapsed_s: t,
        });
    }
    Ok(CoolingResult {
        final_distribution: rho.reset_spin(DARK_LEVEL)?.fock_populations()?,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::{build_schedule, simulate_cooling};
    use crate::quantum::thermal_distribution;
    use approx::assert_relative_eq;

    #[test]
    fn rwa_model_reproduces_rate_map() {
        let model = ProbeModel::default();
        let s = build_schedule(4, model.sideband_rabi, RepumpModel::default()).unwrap();
        let d = thermal_distribution(0.8, 24).unwrap();
        let cfg = IntegratorConfig::default();
        let q = simulate_cooling_quantum(&d, &s, HeatingChannel::none(), RepumpModel::default(), &model, &cfg).unwrap();
        let c = simulate_cooling(&d, &s, HeatingChannel::none(), RepumpModel::default()).unwrap();
        for (a, b) in q.series.iter().zip(&c.series) {
            assert!((a.nbar - b.nbar).abs() < 1e-6);
        }
        for (a, b) in q.final_distribution.populations().iter().zip(c.final_distribution.populations()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn heating_during_pulses_is_close_to_split_heating() {
        let model = ProbeModel::default();
        let s = build_schedule(4, model.sideband_rabi, RepumpModel::default()).unwrap();
        let d = thermal_distribution(0.8, 24).unwrap();
        let ch = HeatingChannel::new(41.0).unwrap();
        let q = simulate_cooling_quantum(&d, &s, ch, RepumpModel::default(), &model, &IntegratorConfig::default()).unwrap();
        let c = simulate_cooling(&d, &s, ch, RepumpModel::default()).unwrap();
        assert_relative_eq!(q.final_nbar(), c.final_nbar(), max_relative = 0.02);
    }

    #[test]
    fn recoil_is_rejected() {
        let model = ProbeModel::default();
        let s = build_schedule(2, model.sideband_rabi, RepumpModel::default()).unwrap();
        let rp = RepumpModel { recoil_quanta: 1.0, ..RepumpModel::default() };
        let d = thermal_distribution(0.3, 10).unwrap();
        assert!(simulate_cooling_quantum(&d, &s, HeatingChannel::none(), rp, &model, &IntegratorConfig::default()).is_err());
    }
}
