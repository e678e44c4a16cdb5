use super::schedule::{pulse_transfer_probability, PulseKind, PulseSchedule, PulseSpec, RepumpModel};
use crate::dynamics::HeatingChannel;
use crate::error::{Error, Result};
use crate::quantum::{FockDistribution, MeanPhonon};

/// Largest population tolerated in the top Fock bin during cooling.
pub const OVERFLOW_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbarPoint {
    /// 0 for the initial state, then one entry per executed pulse.
    pub pulse_index: usize,
    pub nbar: f64,
    pub t_elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingResult {
    pub final_distribution: FockDistribution,
    pub series: Vec<NbarPoint>,
}

impl CoolingResult {
    pub fn final_nbar(&self) -> f64 {
        self.final_distribution.mean_phonon()
    }
}

fn mean(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(n, x)| n as f64 * x).sum()
}

fn flux_derivative(rate: f64, p: &[f64], dp: &mut [f64]) {
    dp.iter_mut().for_each(|d| *d = 0.0);
    for n in 0..p.len() - 1 {
        let f = rate * (n + 1) as f64 * (p[n] - p[n + 1]);
        dp[n] -= f;
        dp[n + 1] += f;
    }
}

/// Birth–death heating (up `ṅ(n+1)`, down `ṅn`, closed at the top bin) of
/// Fock populations over `duration`.
pub fn apply_heating(p: &mut [f64], rate: f64, duration: f64) {
    if rate == 0.0 || duration == 0.0 || p.len() < 2 {
        return;
    }
    let n_top = p.len() - 1;
    let dt_max = 0.5 / (rate * (2 * n_top + 1) as f64);
    let steps = (duration / dt_max).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let len = p.len();
    let mut k = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut tmp = vec![0.0; len];
    for _ in 0..steps {
        let [k1, k2, k3, k4] = &mut k;
        flux_derivative(rate, p, k1);
        tmp.iter_mut().zip(p.iter()).zip(k1.iter()).for_each(|((t, x), d)| *t = x + 0.5 * dt * d);
        flux_derivative(rate, &tmp, k2);
        tmp.iter_mut().zip(p.iter()).zip(k2.iter()).for_each(|((t, x), d)| *t = x + 0.5 * dt * d);
        flux_derivative(rate, &tmp, k3);
        tmp.iter_mut().zip(p.iter()).zip(k3.iter()).for_each(|((t, x), d)| *t = x + dt * d);
        flux_derivative(rate, &tmp, k4);
        for i in 0..len {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Moves `amount[m]` from level m to `m + shift`, splitting a fractional
/// shift between the two neighbouring levels so the mean rises by `shift`.
fn recoil(p: &mut [f64], amount: &[f64], shift: f64) {
    if shift <= 0.0 {
        return;
    }
    let whole = shift.floor() as usize;
    let frac = shift - shift.floor();
    let top = p.len() - 1;
    for (m, &a) in amount.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        p[m] -= a;
        p[(m + whole).min(top)] += a * (1.0 - frac);
        p[(m + whole + 1).min(top)] += a * frac;
    }
}

/// One pulse of the rate map. `moved[m]` holds the population that the
/// last sideband pulse brought down into level m.
fn apply_pulse(p: &mut [f64], moved: &mut [f64], pulse: &PulseSpec, rabi: f64, rate: f64, recoil_quanta: f64) {
    apply_heating(p, rate, pulse.duration / 2.0);
    match pulse.kind {
        PulseKind::RedSideband => {
            moved.iter_mut().for_each(|m| *m = 0.0);
            let old = p.to_vec();
            for n in 1..old.len() {
                let x = old[n] * pulse_transfer_probability(n, pulse.duration, rabi);
                p[n] -= x;
                p[n - 1] += x;
                moved[n - 1] = x;
            }
        }
        PulseKind::Repump => {
            recoil(p, moved, recoil_quanta);
            moved.iter_mut().for_each(|m| *m = 0.0);
        }
    }
    apply_heating(p, rate, pulse.duration / 2.0);
}

/// Classical rate map for the pulse sequence: each red sideband pulse moves
/// `P_transfer(n)` of level n to n − 1, the following repump applies
/// optional recoil to the moved population, and heating acts over every
/// pulse's duration.
pub fn simulate_cooling(
    dist0: &FockDistribution,
    schedule: &PulseSchedule,
    heating: HeatingChannel,
    repump: RepumpModel,
) -> Result<CoolingResult> {
    repump.validate()?;
    if dist0.n_max() <= schedule.n_start() {
        return Err(Error::param(
            "n_max",
            format!("truncation {} must exceed n_start {}", dist0.n_max(), schedule.n_start()),
        ));
    }
    let rabi = schedule.sideband_rabi_1();
    let mut p = dist0.populations().to_vec();
    let mut moved = vec![0.0; p.len()];
    let mut t = 0.0;
    let mut series = Vec::with_capacity(schedule.len() + 1);
    series.push(NbarPoint {
        pulse_index: 0,
        nbar: mean(&p),
        t_elapsed_s: 0.0,
    });
    for (i, pulse) in schedule.pulses().iter().enumerate() {
        apply_pulse(&mut p, &mut moved, pulse, rabi, heating.rate(), repump.recoil_quanta);
        t += pulse.duration;
        let top = *p.last().unwrap();
        if top > OVERFLOW_LIMIT {
            return Err(Error::Truncation(format!(
                "after pulse {i}: top Fock bin {} holds {top:.3e}",
                p.len() - 1
            )));
        }
        series.push(NbarPoint {
            pulse_index: i + 1,
            nbar: mean(&p),
            t_elapsed_s: t,
        });
    }
    for x in &mut p {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(CoolingResult {
        final_distribution: FockDistribution::new(p)?,
        series,
    })
}
