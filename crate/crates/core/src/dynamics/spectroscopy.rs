use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::integrator::IntegratorConfig;
use super::lindblad::{evolve_lindblad, heating_collapse_ops, HeatingChannel, LindbladModel};
use super::propagate::basis_state_readout;
use crate::error::{Error, Result};
use crate::ion::{
    build_dressed_rf_hamiltonian, effective_space, effective_two_level_hamiltonian, full_space,
    lamb_dicke_eff, DressedOptions, DriveField, Hamiltonian, IonLevels, Sideband, TrapParams,
};
use crate::quantum::{mean_phonon, thermal_distribution, DensityMatrix, FockDistribution, ProductSpace};

/// Spin level that reads out as F = 0; every other level is bright.
pub const DARK_LEVEL: &str = "0'";

/// Largest population tolerated in the highest Fock level after an evolution.
pub const TOP_LEVEL_LIMIT: f64 = 1e-6;

/// Detected `F = 1` population.
pub fn f1_population(rho: &DensityMatrix) -> Result<f64> {
    Ok((1.0 - rho.level_population(DARK_LEVEL)?).clamp(0.0, 1.0))
}

/// Fock cutoff for a run starting at `n_bar0` and heated at `rate` for
/// `t_max`.
pub fn dynamics_cutoff(n_bar0: f64, rate: f64, t_max: f64) -> usize {
    let scale = 20.0 * (n_bar0 + rate * t_max + 1.0);
    (scale.ceil() as usize).max(20)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `{|0'⟩, |D⟩} ⊗ Fock`.
    Effective,
    /// `{|0⟩, |−1⟩, |0'⟩, |+1⟩} ⊗ Fock` with explicit dressing fields.
    FullDressed,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "effective" => Ok(ModelKind::Effective),
            "full_dressed" | "full" => Ok(ModelKind::FullDressed),
            other => Err(Error::param("model", format!("expected `effective` or `full_dressed`, got `{other}`"))),
        }
    }
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Effective => "effective",
            ModelKind::FullDressed => "full_dressed",
        }
    }
}

/// Everything needed to build the probe Hamiltonian at a given detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeModel {
    pub kind: ModelKind,
    pub trap: TrapParams,
    pub levels: IonLevels,
    /// `|0'⟩↔|D⟩` carrier Rabi frequency, Hz.
    pub carrier_rabi: f64,
    /// `η·Ω`, the red sideband Rabi frequency from n = 1, Hz.
    pub sideband_rabi: f64,
    /// Rabi frequency of each dressing field, Hz.
    pub dressing_rabi: f64,
    pub keep_carrier: bool,
    pub include_minus_coupling: bool,
}

impl ProbeModel {
    /// Model with the sideband coupling derived from the trap gradient.
    pub fn from_trap(trap: TrapParams, levels: IonLevels, carrier_rabi: f64, dressing_rabi: f64) -> Result<Self> {
        let eta = lamb_dicke_eff(&trap)?;
        let m = Self {
            kind: ModelKind::Effective,
            trap,
            levels,
            carrier_rabi,
            sideband_rabi: eta * carrier_rabi,
            dressing_rabi,
            keep_carrier: false,
            include_minus_coupling: true,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_sideband_rabi(mut self, sideband_rabi: f64) -> Result<Self> {
        self.sideband_rabi = sideband_rabi;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.trap.validate()?;
        self.levels.validate()?;
        if !(self.carrier_rabi > 0.0) || !self.carrier_rabi.is_finite() {
            return Err(Error::param("carrier_rabi", format!("must be > 0, got {}", self.carrier_rabi)));
        }
        for (name, v) in [("sideband_rabi", self.sideband_rabi), ("dressing_rabi", self.dressing_rabi)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn nu_z(&self) -> f64 {
        self.trap.nu_z
    }

    /// Effective Lamb-Dicke parameter implied by the two Rabi frequencies.
    pub fn eta(&self) -> f64 {
        self.sideband_rabi / self.carrier_rabi
    }

    pub fn space(&self, n_max: usize) -> Result<ProductSpace> {
        match self.kind {
            ModelKind::Effective => effective_space(n_max),
            ModelKind::FullDressed => full_space(n_max),
        }
    }

    /// Probe Hamiltonian at `detuning` (Hz) from the carrier.
    pub fn hamiltonian(&self, detuning: f64, space: &ProductSpace) -> Result<Hamiltonian> {
        match self.kind {
            ModelKind::Effective => effective_two_level_hamiltonian(
                self.eta(),
                self.carrier_rabi,
                self.trap.nu_z,
                detuning,
                space,
                self.keep_carrier,
            ),
            ModelKind::FullDressed => build_dressed_rf_hamiltonian(
                &self.trap,
                &self.levels,
                &[
                    DriveField::dressing("+1", self.dressing_rabi),
                    DriveField::dressing("-1", self.dressing_rabi),
                ],
                &DriveField::probe(self.carrier_rabi, detuning),
                space,
                DressedOptions {
                    keep_carrier: self.keep_carrier,
                    include_minus_coupling: self.include_minus_coupling,
                    eta: Some(self.eta()),
                },
            ),
        }
    }
}

impl Default for ProbeModel {
    fn default() -> Self {
        Self::from_trap(TrapParams::default(), IonLevels::default(), 61.2e3, 32e3).expect("default parameters are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagation {
    /// Pure-state propagation of each Fock component when the motional state
    /// is diagonal and there is no heating; master equation otherwise.
    #[default]
    Auto,
    MasterEquation,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub integrator: IntegratorConfig,
    pub propagation: Propagation,
    /// Overrides the automatic Fock cutoff.
    pub n_max: Option<usize>,
}

/// Number of measurements behind each probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(u32),
}

impl Shots {
    pub fn count(self) -> Option<u32> {
        match self {
            Shots::Exact => None,
            Shots::Count(n) => Some(n),
        }
    }
}

fn validate_curve(x_name: &'static str, x: &[f64], p: &[f64]) -> Result<()> {
    if x.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: p.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::param(x_name, "values must be finite"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(x_name, "values must be strictly increasing"));
    }
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::param("p_f1", format!("probability {bad} outside [0, 1]")));
    }
    Ok(())
}

fn sample<R: Rng + ?Sized>(p: &[f64], shots: u32, rng: &mut R) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::param("shots", "must be > 0"));
    }
    p.iter()
        .map(|&q| {
            let b = Binomial::new(u64::from(shots), q).map_err(|e| Error::param("p_f1", e.to_string()))?;
            Ok(b.sample(rng) as f64 / f64::from(shots))
        })
        .collect()
}

/// `P(F=1)` versus probe time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlopResult {
    time_s: Vec<f64>,
    p_f1: Vec<f64>,
    shots: Shots,
}

impl FlopResult {
    pub fn new(time_s: Vec<f64>, p_f1: Vec<f64>, shots: Shots) -> Result<Self> {
        validate_curve("time_s", &time_s, &p_f1)?;
        Ok(Self { time_s, p_f1, shots })
    }

    pub fn time_s(&self) -> &[f64] {
        &self.time_s
    }

    pub fn p_f1(&self) -> &[f64] {
        &self.p_f1
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    pub fn len(&self) -> usize {
        self.time_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_s.is_empty()
    }

    /// Binomially resampled copy with `shots` measurements per point.
    pub fn with_shot_noise<R: Rng + ?Sized>(&self, shots: u32, rng: &mut R) -> Result<Self> {
        Self::new(self.time_s.clone(), sample(&self.p_f1, shots, rng)?, Shots::Count(shots))
    }
}

/// `P(F=1)` versus probe detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    detuning_hz: Vec<f64>,
    p_f1: Vec<f64>,
    shots: Shots,
}

impl ScanResult {
    pub fn new(detuning_hz: Vec<f64>, p_f1: Vec<f64>, shots: Shots) -> Result<Self> {
        validate_curve("detuning_hz", &detuning_hz, &p_f1)?;
        Ok(Self { detuning_hz, p_f1, shots })
    }

    pub fn detuning_hz(&self) -> &[f64] {
        &self.detuning_hz
    }

    pub fn p_f1(&self) -> &[f64] {
        &self.p_f1
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    pub fn len(&self) -> usize {
        self.detuning_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning_hz.is_empty()
    }

    /// Largest probability and its detuning.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.detuning_hz
            .iter()
            .zip(&self.p_f1)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(&x, &p)| (x, p))
    }

    pub fn with_shot_noise<R: Rng + ?Sized>(&self, shots: u32, rng: &mut R) -> Result<Self> {
        Self::new(self.detuning_hz.clone(), sample(&self.p_f1, shots, rng)?, Shots::Count(shots))
    }
}

/// Evenly spaced grid of `points` values covering `[center − span/2, center + span/2]`.
pub fn linear_grid(center: f64, span: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::param("points", "must be > 0"));
    }
    if points == 1 {
        return Ok(vec![center]);
    }
    if !(span > 0.0) {
        return Err(Error::param("span", format!("must be > 0, got {span}")));
    }
    let lo = center - span / 2.0;
    let hi = center + span / 2.0;
    let step = span / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k + 1 == points { hi } else { lo + step * k as f64 })
        .collect())
}

fn bright_weights(space: &ProductSpace) -> Result<Vec<f64>> {
    let dark = space.spin.index_of(DARK_LEVEL)?;
    Ok((0..space.dim())
        .map(|i| if space.split(i).0 == dark { 0.0 } else { 1.0 })
        .collect())
}

fn top_weights(space: &ProductSpace) -> Vec<f64> {
    let top = space.fock.n_max();
    (0..space.dim())
        .map(|i| if space.split(i).1 == top { 1.0 } else { 0.0 })
        .collect()
}

fn truncation_error(top: f64, n_max: usize) -> Error {
    Error::Truncation(format!(
        "population {top:.3e} reached Fock level {n_max}; increase n_max"
    ))
}

/// Bright and top-Fock-level populations after `times` for each start
/// `|0', n⟩`, n = 0..=n_max, in a space with one spare Fock level.
/// Indexed `[n][time]`.
#[derive(Debug, Clone)]
struct FockResponses {
    bright: Vec<Vec<f64>>,
    top: Vec<Vec<f64>>,
    top_level: usize,
}

impl FockResponses {
    fn compute(model: &ProbeModel, detuning: f64, n_max: usize, times: &[f64], cfg: &IntegratorConfig) -> Result<Self> {
        let space = model.space(n_max + 1)?;
        let h = model.hamiltonian(detuning, &space)?;
        let starts = (0..=n_max)
            .map(|n| space.index_of(DARK_LEVEL, n))
            .collect::<Result<Vec<_>>>()?;
        let raw = basis_state_readout(&h, &starts, &[&bright_weights(&space)?, &top_weights(&space)], times, cfg)?;
        let pick = |k: usize| raw.iter().map(|per_t| per_t.iter().map(|v| v[k]).collect()).collect();
        Ok(Self {
            bright: pick(0),
            top: pick(1),
            top_level: n_max + 1,
        })
    }

    /// `P(F=1)` at time index `k` for Fock populations `pops`.
    fn contract(&self, pops: &[f64], k: usize) -> Result<f64> {
        let weigh = |rows: &[Vec<f64>]| pops.iter().zip(rows).map(|(p, r)| p * r[k]).sum::<f64>();
        let top = weigh(&self.top);
        if top > TOP_LEVEL_LIMIT {
            return Err(truncation_error(top, self.top_level));
        }
        Ok(weigh(&self.bright).clamp(0.0, 1.0))
    }
}

/// Per-Fock-state scan responses. Any diagonal motional state is then a
/// weighted sum, which makes repeated evaluation during fits cheap.
#[derive(Debug, Clone)]
pub struct ResponseTable {
    detunings: Vec<f64>,
    t_probe: f64,
    n_max: usize,
    rows: Vec<FockResponses>,
}

impl ResponseTable {
    /// Responses at `t_probe` without heating.
    pub fn compute(
        model: &ProbeModel,
        detunings: &[f64],
        t_probe: f64,
        n_max: usize,
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        model.validate()?;
        if !(t_probe > 0.0) {
            return Err(Error::param("t_probe", format!("must be > 0, got {t_probe}")));
        }
        let rows = detunings
            .par_iter()
            .map(|&d| FockResponses::compute(model, d, n_max, &[t_probe], cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            detunings: detunings.to_vec(),
            t_probe,
            n_max,
            rows,
        })
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn t_probe(&self) -> f64 {
        self.t_probe
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Scan for an initial motional distribution (spin in `|0'⟩`).
    pub fn contract(&self, dist: &FockDistribution) -> Result<Vec<f64>> {
        if dist.n_max() > self.n_max {
            return Err(Error::DimensionMismatch {
                expected: self.n_max + 1,
                got: dist.n_max() + 1,
            });
        }
        self.rows.iter().map(|r| r.contract(dist.populations(), 0)).collect()
    }

    pub fn scan(&self, dist: &FockDistribution) -> Result<ScanResult> {
        ScanResult::new(self.detunings.clone(), self.contract(dist)?, Shots::Exact)
    }
}

fn check_initial(dist: &FockDistribution) -> Result<()> {
    if dist.top_population() > TOP_LEVEL_LIMIT {
        return Err(truncation_error(dist.top_population(), dist.n_max()));
    }
    Ok(())
}

fn lindblad_f1(
    model: &ProbeModel,
    detuning: f64,
    dist: &FockDistribution,
    heating: HeatingChannel,
    times: &[f64],
    n_max: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let space = model.space(n_max)?;
    let h = model.hamiltonian(detuning, &space)?;
    let lm = LindbladModel::new(h, heating_collapse_ops(heating, &space))?;
    let rho0 = DensityMatrix::spin_times_fock(&space, space.spin.index_of(DARK_LEVEL)?, &dist.resized(n_max)?)?;
    let states = evolve_lindblad(&lm, &rho0, times, cfg)?;
    states
        .iter()
        .map(|rho| {
            let top = *rho.fock_diagonal().last().expect("non-empty");
            if top > TOP_LEVEL_LIMIT {
                return Err(truncation_error(top, n_max));
            }
            f1_population(rho)
        })
        .collect()
}

/// Resonant sideband flop from `|0'⟩ ⊗ thermal(n_bar)`.
pub fn simulate_flop(
    model: &ProbeModel,
    sideband: Sideband,
    times: &[f64],
    n_bar: f64,
    heating: HeatingChannel,
    opts: &SimOptions,
) -> Result<FlopResult> {
    model.validate()?;
    opts.integrator.validate()?;
    let t_max = times.last().copied().unwrap_or(0.0);
    let n_max = opts.n_max.unwrap_or_else(|| dynamics_cutoff(n_bar, heating.rate(), t_max));
    let dist = thermal_distribution(n_bar, n_max)?;
    let detuning = sideband.detuning_sign() * model.nu_z();
    let p = if heating.rate() == 0.0 && opts.propagation == Propagation::Auto {
        check_initial(&dist)?;
        let rows = FockResponses::compute(model, detuning, n_max, times, &opts.integrator)?;
        (0..times.len())
            .map(|k| rows.contract(dist.populations(), k))
            .collect::<Result<Vec<_>>>()?
    } else {
        lindblad_f1(model, detuning, &dist, heating, times, n_max, &opts.integrator)?
    };
    FlopResult::new(times.to_vec(), p, Shots::Exact)
}

/// Probe scan of duration `t_probe` from `|0'⟩ ⊗ initial`.
pub fn simulate_scan(
    model: &ProbeModel,
    detunings: &[f64],
    t_probe: f64,
    initial: &FockDistribution,
    heating: HeatingChannel,
    opts: &SimOptions,
) -> Result<ScanResult> {
    model.validate()?;
    opts.integrator.validate()?;
    if heating.rate() == 0.0 && opts.propagation == Propagation::Auto {
        let n_max = opts.n_max.unwrap_or(initial.n_max()).max(initial.n_max());
        let dist = initial.resized(n_max)?;
        check_initial(&dist)?;
        return ResponseTable::compute(model, detunings, t_probe, n_max, &opts.integrator)?.scan(&dist);
    }
    let n_max = opts
        .n_max
        .unwrap_or_else(|| dynamics_cutoff(mean_phonon(initial), heating.rate(), t_probe))
        .max(initial.n_max() + 1);
    let p = detunings
        .par_iter()
        .map(|&d| lindblad_f1(model, d, initial, heating, &[t_probe], n_max, &opts.integrator).map(|v| v[0]))
        .collect::<Result<Vec<_>>>()?;
    ScanResult::new(detunings.to_vec(), p, Shots::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn fig3_model() -> ProbeModel {
        ProbeModel::default().with_sideband_rabi(350.0).unwrap()
    }

    fn analytic(sideband: Sideband, n_bar: f64, eta_omega: f64, t: f64, n_max: usize) -> f64 {
        let d = thermal_distribution(n_bar, n_max).unwrap();
        (0..=n_max)
            .map(|n| {
                let k = match sideband {
                    Sideband::Red => n as f64,
                    Sideband::Blue => (n + 1) as f64,
                };
                d.p(n) * (1.0 - (TAU * eta_omega * k.sqrt() * t).cos()) / 2.0
            })
            .sum()
    }

    #[test]
    fn default_model_uses_gradient_coupling() {
        let m = ProbeModel::default();
        assert!((m.sideband_rabi - 394.3).abs() < 1.0, "{}", m.sideband_rabi);
        assert!(ProbeModel::default().with_sideband_rabi(-1.0).is_err());
    }

    #[test]
    fn vacuum_red_flop_is_dark() {
        let times: Vec<f64> = (1..=20).map(|k| k as f64 * 5e-4).collect();
        let r = simulate_flop(&fig3_model(), Sideband::Red, &times, 0.0, HeatingChannel::none(), &SimOptions::default()).unwrap();
        assert!(r.p_f1().iter().all(|&p| p < 1e-12));
    }

    #[test]
    fn vacuum_blue_flop_is_cosine() {
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 2.5e-4).collect();
        let r = simulate_flop(&fig3_model(), Sideband::Blue, &times, 0.0, HeatingChannel::none(), &SimOptions::default()).unwrap();
        for (t, p) in times.iter().zip(r.p_f1()) {
            let want = (1.0 - (TAU * 350.0 * t).cos()) / 2.0;
            assert!((p - want).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_and_master_equation_paths_agree() {
        let m = fig3_model();
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 4e-4).collect();
        let auto = SimOptions::default();
        let me = SimOptions {
            propagation: Propagation::MasterEquation,
            n_max: Some(30),
            ..SimOptions::default()
        };
        for sb in [Sideband::Red, Sideband::Blue] {
            let a = simulate_flop(&m, sb, &times, 0.4, HeatingChannel::none(), &auto).unwrap();
            let b = simulate_flop(&m, sb, &times, 0.4, HeatingChannel::none(), &me).unwrap();
            for (x, y) in a.p_f1().iter().zip(b.p_f1()) {
                assert!((x - y).abs() < 1e-5, "{x} vs {y}");
            }
            for (t, x) in times.iter().zip(a.p_f1()) {
                assert!((x - analytic(sb, 0.4, 350.0, *t, 40)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn scan_peaks_on_sidebands() {
        let m = ProbeModel::default();
        let nu = m.nu_z();
        let dist = thermal_distribution(0.13, 20).unwrap();
        let grid = linear_grid(nu, 6e3, 61).unwrap();
        let blue = simulate_scan(&m, &grid, 1270e-6, &dist, HeatingChannel::none(), &SimOptions::default()).unwrap();
        let (x, p) = blue.peak().unwrap();
        assert!((x - nu).abs() <= 100.0 + 1e-9);
        assert!(p > 0.8);
        let far = simulate_scan(&m, &[nu + 20e3], 1270e-6, &dist, HeatingChannel::none(), &SimOptions::default()).unwrap();
        assert!(far.p_f1()[0] < 0.02);
    }

    #[test]
    fn peak_ratio_tracks_thermal_ratio() {
        let m = ProbeModel::default();
        let nu = m.nu_z();
        let dist = thermal_distribution(0.13, 20).unwrap();
        let opts = SimOptions::default();
        let red = simulate_scan(&m, &[-nu], 1270e-6, &dist, HeatingChannel::none(), &opts).unwrap();
        let blue = simulate_scan(&m, &[nu], 1270e-6, &dist, HeatingChannel::none(), &opts).unwrap();
        let r = red.p_f1()[0] / blue.p_f1()[0];
        assert!((r - 0.13 / 1.13).abs() < 0.02, "{r}");
    }

    #[test]
    fn heated_scan_matches_table_at_zero_rate() {
        let m = ProbeModel::default();
        let nu = m.nu_z();
        let dist = thermal_distribution(0.13, 20).unwrap();
        let grid = [-nu - 500.0, -nu, -nu + 300.0];
        let a = simulate_scan(&m, &grid, 1270e-6, &dist, HeatingChannel::none(), &SimOptions::default()).unwrap();
        let me = SimOptions {
            propagation: Propagation::MasterEquation,
            n_max: Some(21),
            ..SimOptions::default()
        };
        let b = simulate_scan(&m, &grid, 1270e-6, &dist, HeatingChannel::none(), &me).unwrap();
        for (x, y) in a.p_f1().iter().zip(b.p_f1()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn full_dressed_model_agrees_near_resonance() {
        let eff = ProbeModel::default();
        let full = ProbeModel::default().with_kind(ModelKind::FullDressed);
        let nu = eff.nu_z();
        let dist = thermal_distribution(0.5, 15).unwrap();
        let grid = [-nu, nu];
        let opts = SimOptions::default();
        let a = simulate_scan(&eff, &grid, 1270e-6, &dist, HeatingChannel::none(), &opts).unwrap();
        let b = simulate_scan(&full, &grid, 1270e-6, &dist, HeatingChannel::none(), &opts).unwrap();
        for (x, y) in a.p_f1().iter().zip(b.p_f1()) {
            assert!((x - y).abs() < 0.02, "{x} vs {y}");
        }
    }

    #[test]
    fn truncation_is_reported() {
        let opts = SimOptions {
            n_max: Some(3),
            ..SimOptions::default()
        };
        let err = simulate_flop(&fig3_model(), Sideband::Blue, &[1e-3], 2.0, HeatingChannel::none(), &opts).unwrap_err();
        assert!(matches!(err, Error::Truncation(_)));
    }

    #[test]
    fn results_validate_inputs() {
        assert!(ScanResult::new(vec![1.0, 1.0], vec![0.1, 0.2], Shots::Exact).is_err());
        assert!(ScanResult::new(vec![1.0, 2.0], vec![0.1, 1.2], Shots::Exact).is_err());
        assert!(FlopResult::new(vec![0.0], vec![0.1, 0.2], Shots::Exact).is_err());
    }

    #[test]
    fn shot_noise_is_seeded() {
        let s = ScanResult::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0], Shots::Exact).unwrap();
        let a = s.with_shot_noise(100, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = s.with_shot_noise(100, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p_f1()[0], 0.0);
        assert_eq!(a.p_f1()[2], 1.0);
        assert_eq!(a.shots(), Shots::Count(100));
    }

    #[test]
    fn grid_hits_endpoints() {
        let g = linear_grid(426.7e3, 6e3, 61).unwrap();
        assert_eq!(g[0], 426.7e3 - 3e3);
        assert_eq!(g[60], 426.7e3 + 3e3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
