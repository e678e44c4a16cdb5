use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::data::{
    load_flop, load_heating_data, load_scan, save_distribution, save_flop, save_heating_data, save_nbar_series,
    save_scan, save_schedule, HeatingData,
};
use super::manifest::{manifest_path, RunManifest};
use crate::cooling::{
    apply_heating, build_schedule, schedule_total_time, simulate_cooling, CoolingResult, PulseSchedule, ScheduleTime,
};
use crate::dynamics::{linear_grid, simulate_flop, simulate_scan, FlopResult, HeatingChannel, ResponseTable, ScanResult, Shots};
use crate::error::{Error, Result};
use crate::ion::{ground_state_extent, lamb_dicke_eff, sideband_rabi, Sideband};
use crate::quantum::{thermal_distribution, FockDistribution, MeanPhonon};
use crate::thermometry::{
    doppler_limit, eq_cutoff, fit_heating_rate, fit_nbar_flop, fit_nbar_spectra, noise_density, FitOptions, FitResult,
    HeatingRateFit, SpectraFixed,
};

/// `N` or `inf`.
pub fn parse_shots(s: &str) -> std::result::Result<Shots, String> {
    if s == "inf" {
        return Ok(Shots::Exact);
    }
    match s.parse::<u32>() {
        Ok(n) if n > 0 => Ok(Shots::Count(n)),
        _ => Err(format!("expected a positive shot count or `inf`, got `{s}`")),
    }
}

fn config_shots(cfg: &ExperimentConfig) -> Shots {
    cfg.shots_per_point.map_or(Shots::Exact, Shots::Count)
}

fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn noisy_scan(scan: ScanResult, shots: Shots, rng: &mut ChaCha8Rng) -> Result<ScanResult> {
    match shots {
        Shots::Exact => Ok(scan),
        Shots::Count(n) => scan.with_shot_noise(n, rng),
    }
}

fn noisy_flop(flop: FlopResult, shots: Shots, rng: &mut ChaCha8Rng) -> Result<FlopResult> {
    match shots {
        Shots::Exact => Ok(flop),
        Shots::Count(n) => flop.with_shot_noise(n, rng),
    }
}

fn write_manifest(command: &str, cfg: &ExperimentConfig, path: &Path, outputs: &[PathBuf]) -> Result<()> {
    RunManifest::new(command, cfg, outputs).save(path)
}

fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

fn sideband_grid(cfg: &ExperimentConfig, sideband: Sideband, center: Option<f64>, span: f64, points: usize) -> Result<Vec<f64>> {
    let c = center.unwrap_or(sideband.detuning_sign() * cfg.nu_z_hz);
    linear_grid(c, span, points)
}

/// Derived constants for the configured trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsReport {
    pub eta_eff: f64,
    pub z0_m: f64,
    pub doppler_nbar: f64,
    /// Red sideband Rabi frequency out of n = 1, Hz.
    pub sideband_rabi_1_hz: f64,
    pub heating_rate: f64,
    pub noise_density: f64,
}

impl fmt::Display for ConstantsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "eta_eff            = {:.4}", self.eta_eff)?;
        writeln!(f, "z0                 = {:.4e} m", self.z0_m)?;
        writeln!(f, "doppler_limit_nbar = {:.2}", self.doppler_nbar)?;
        writeln!(f, "sideband_rabi_n1   = {:.2} Hz", self.sideband_rabi_1_hz)?;
        write!(
            f,
            "noise_density      = {:.3e} V^2/m^2 (heating rate {} 1/s)",
            self.noise_density, self.heating_rate
        )
    }
}

pub fn cmd_constants(cfg: &ExperimentConfig) -> Result<ConstantsReport> {
    let trap = cfg.trap();
    let model = cfg.probe_model()?;
    Ok(ConstantsReport {
        eta_eff: lamb_dicke_eff(&trap)?,
        z0_m: ground_state_extent(&trap)?,
        doppler_nbar: doppler_limit(cfg.linewidth_hz, cfg.nu_z_hz)?,
        sideband_rabi_1_hz: sideband_rabi(1, Sideband::Red, model.eta(), model.carrier_rabi),
        heating_rate: cfg.heating_rate,
        noise_density: noise_density(cfg.heating_rate, cfg.nu_z_hz, cfg.mass_amu)?,
    })
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value = "red")]
    pub sideband: Sideband,
    /// Grid center, Hz (default: the sideband resonance).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    #[arg(long, default_value_t = 6e3)]
    pub span: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Probe duration, s (default: from config).
    #[arg(long)]
    pub probe_time: Option<f64>,
    #[arg(long, default_value_t = 0.13)]
    pub nbar: f64,
    /// Shots per point, or `inf` (default: from config).
    #[arg(long, value_parser = parse_shots)]
    pub shots: Option<Shots>,
    /// Apply the configured heating rate during the probe.
    #[arg(long)]
    pub with_heating: bool,
    #[arg(long, short, default_value = "scan.csv")]
    pub output: PathBuf,
}

impl Default for ScanArgs {
    fn default() -> Self {
        Self {
            sideband: Sideband::Red,
            center: None,
            span: 6e3,
            points: 61,
            probe_time: None,
            nbar: 0.13,
            shots: None,
            with_heating: false,
            output: PathBuf::from("scan.csv"),
        }
    }
}

/// Simulated scan as `cmd_scan` would write it.
pub fn scan_data(cfg: &ExperimentConfig, args: &ScanArgs) -> Result<ScanResult> {
    scan_with_rng(cfg, args, &mut rng(cfg))
}

fn scan_with_rng(cfg: &ExperimentConfig, args: &ScanArgs, rng: &mut ChaCha8Rng) -> Result<ScanResult> {
    let model = cfg.probe_model()?;
    let grid = sideband_grid(cfg, args.sideband, args.center, args.span, args.points)?;
    let t_probe = args.probe_time.unwrap_or(cfg.probe_time_s);
    let dist = thermal_distribution(args.nbar, eq_cutoff(args.nbar))?;
    let heating = if args.with_heating { cfg.heating()? } else { HeatingChannel::none() };
    let scan = simulate_scan(&model, &grid, t_probe, &dist, heating, &cfg.sim_options())?;
    noisy_scan(scan, args.shots.unwrap_or(config_shots(cfg)), rng)
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub scan: ScanResult,
    pub output: PathBuf,
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (d, p) = self.scan.peak().unwrap_or((f64::NAN, f64::NAN));
        write!(
            f,
            "wrote {} ({} points); peak P(F=1) = {p:.4} at {d:.1} Hz",
            self.output.display(),
            self.scan.len()
        )
    }
}

pub fn cmd_scan(cfg: &ExperimentConfig, args: &ScanArgs) -> Result<ScanReport> {
    let scan = scan_data(cfg, args)?;
    save_scan(&args.output, &scan)?;
    write_manifest("scan", cfg, &manifest_path(&args.output), std::slice::from_ref(&args.output))?;
    Ok(ScanReport {
        scan,
        output: args.output.clone(),
    })
}

#[derive(Debug, Clone, Args)]
pub struct CoolArgs {
    /// Highest Fock level addressed (default: from config).
    #[arg(long)]
    pub nstart: Option<usize>,
    /// Initial thermal n̄ (default: from config).
    #[arg(long)]
    pub nbar0: Option<f64>,
    #[arg(long, default_value = "cool")]
    pub out_dir: PathBuf,
}

/// Fock cutoff for cooling runs: well above the schedule start and the
/// initial thermal tail.
pub fn cooling_cutoff(n_start: usize, nbar0: f64) -> usize {
    (n_start + 100).max(eq_cutoff(nbar0))
}

#[derive(Debug, Clone)]
pub struct CoolReport {
    pub result: CoolingResult,
    pub time: ScheduleTime,
    pub n_pulses: usize,
    pub outputs: Vec<PathBuf>,
}

impl CoolReport {
    pub fn ground_population(&self) -> f64 {
        self.result.final_distribution.p(0)
    }
}

impl fmt::Display for CoolReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pulses        = {}", self.n_pulses)?;
        writeln!(
            f,
            "schedule time = {:.2} ms (sideband {:.2} ms, repump {:.2} ms)",
            1e3 * self.time.total,
            1e3 * self.time.sideband,
            1e3 * self.time.repump
        )?;
        writeln!(f, "final nbar    = {:.4}", self.result.final_nbar())?;
        write!(f, "final p0      = {:.4}", self.ground_population())
    }
}

fn run_cooling(cfg: &ExperimentConfig, n_start: usize, nbar0: f64) -> Result<(CoolingResult, PulseSchedule)> {
    let model = cfg.probe_model()?;
    let repump = cfg.repump();
    let schedule = build_schedule(n_start, model.sideband_rabi, repump)?;
    let dist0 = thermal_distribution(nbar0, cooling_cutoff(n_start, nbar0))?;
    let result = simulate_cooling(&dist0, &schedule, cfg.heating()?, repump)?;
    Ok((result, schedule))
}

pub fn cmd_cool(cfg: &ExperimentConfig, args: &CoolArgs) -> Result<CoolReport> {
    let n_start = args.nstart.unwrap_or(cfg.n_start);
    let nbar0 = args.nbar0.unwrap_or(cfg.nbar_initial);
    let (result, schedule) = run_cooling(cfg, n_start, nbar0)?;
    let nbar_path = out_file(&args.out_dir, "cool_nbar.csv")?;
    let dist_path = args.out_dir.join("cool_distribution.csv");
    let sched_path = args.out_dir.join("cool_schedule.csv");
    save_nbar_series(&nbar_path, &result.series)?;
    save_distribution(&dist_path, &result.final_distribution)?;
    save_schedule(&sched_path, &schedule)?;
    let outputs = vec![nbar_path, dist_path, sched_path];
    write_manifest("cool", cfg, &args.out_dir.join("manifest.json"), &outputs)?;
    Ok(CoolReport {
        result,
        time: schedule_total_time(&schedule),
        n_pulses: schedule.len(),
        outputs,
    })
}

#[derive(Debug, Clone, Args)]
pub struct FlopArgs {
    #[arg(long, default_value = "blue")]
    pub sideband: Sideband,
    /// Longest pulse, s.
    #[arg(long, default_value_t = 10e-3)]
    pub tmax: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long, default_value_t = 0.13)]
    pub nbar: f64,
    /// Shots per point, or `inf` (default: noiseless).
    #[arg(long, value_parser = parse_shots, default_value = "inf")]
    pub shots: Shots,
    /// Ignore the configured heating rate.
    #[arg(long)]
    pub no_heating: bool,
    #[arg(long, short, default_value = "flop.csv")]
    pub output: PathBuf,
}

impl Default for FlopArgs {
    fn default() -> Self {
        Self {
            sideband: Sideband::Blue,
            tmax: 10e-3,
            points: 201,
            nbar: 0.13,
            shots: Shots::Exact,
            no_heating: false,
            output: PathBuf::from("flop.csv"),
        }
    }
}

/// `t_k = tmax · k / (points − 1)`.
pub fn flop_times(tmax: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(tmax > 0.0) || !tmax.is_finite() {
        return Err(Error::param("tmax", "need tmax > 0 and at least two points"));
    }
    Ok((0..points).map(|k| tmax * k as f64 / (points - 1) as f64).collect())
}

pub fn flop_data(cfg: &ExperimentConfig, args: &FlopArgs) -> Result<FlopResult> {
    let model = cfg.probe_model()?;
    let heating = if args.no_heating { HeatingChannel::none() } else { cfg.heating()? };
    let times = flop_times(args.tmax, args.points)?;
    let flop = simulate_flop(&model, args.sideband, &times, args.nbar, heating, &cfg.sim_options())?;
    noisy_flop(flop, args.shots, &mut rng(cfg))
}

#[derive(Debug, Clone)]
pub struct FlopReport {
    pub flop: FlopResult,
    pub output: PathBuf,
}

impl fmt::Display for FlopReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max = self.flop.p_f1().iter().copied().fold(0.0, f64::max);
        write!(f, "wrote {} ({} points); max P(F=1) = {max:.4}", self.output.display(), self.flop.len())
    }
}

pub fn cmd_flop(cfg: &ExperimentConfig, args: &FlopArgs) -> Result<FlopReport> {
    let flop = flop_data(cfg, args)?;
    save_flop(&args.output, &flop)?;
    write_manifest("flop", cfg, &manifest_path(&args.output), std::slice::from_ref(&args.output))?;
    Ok(FlopReport {
        flop,
        output: args.output.clone(),
    })
}

#[derive(Debug, Clone, Args)]
pub struct HeatrateArgs {
    /// Comma-separated delays after cooling, s.
    #[arg(long, value_delimiter = ',', default_value = "0,5e-3,10e-3")]
    pub delays: Vec<f64>,
    #[arg(long, default_value_t = 6e3)]
    pub span: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Shots per point, or `inf` (default: noiseless).
    #[arg(long, value_parser = parse_shots, default_value = "inf")]
    pub shots: Shots,
    /// Also write the scans and n̄ table here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Default for HeatrateArgs {
    fn default() -> Self {
        Self {
            delays: vec![0.0, 5e-3, 10e-3],
            span: 6e3,
            points: 61,
            shots: Shots::Exact,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DelayPoint {
    pub delay_s: f64,
    /// n̄ of the simulated distribution.
    pub true_nbar: f64,
    pub fit: FitResult,
    pub red: ScanResult,
    pub blue: ScanResult,
}

#[derive(Debug, Clone)]
pub struct HeatrateReport {
    pub points: Vec<DelayPoint>,
    pub fit: HeatingRateFit,
    pub noise_density: f64,
    pub outputs: Vec<PathBuf>,
}

impl fmt::Display for HeatrateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "delay_ms  nbar_fit   nbar_err   nbar_true")?;
        for p in &self.points {
            writeln!(
                f,
                "{:8.3}  {:9.5}  {:9.5}  {:9.5}",
                1e3 * p.delay_s,
                p.fit.value,
                p.fit.std_error,
                p.true_nbar
            )?;
        }
        writeln!(
            f,
            "heating rate  = {:.2} +/- {:.2} 1/s",
            self.fit.rate.value, self.fit.rate.std_error
        )?;
        writeln!(f, "nbar at t=0   = {:.4} +/- {:.4}", self.fit.intercept, self.fit.intercept_std_error)?;
        write!(f, "noise density = {:.3e} V^2/m^2", self.noise_density)
    }
}

fn heating_data(points: &[DelayPoint]) -> HeatingData {
    HeatingData {
        delay_s: points.iter().map(|p| p.delay_s).collect(),
        nbar: points.iter().map(|p| p.fit.value).collect(),
        nbar_err: points.iter().map(|p| p.fit.std_error).collect(),
    }
}

fn regress(d: &HeatingData) -> Result<HeatingRateFit> {
    let usable = d.nbar_err.iter().all(|e| e.is_finite() && *e > 0.0);
    fit_heating_rate(&d.delay_s, &d.nbar, if usable { &d.nbar_err } else { &[] })
}

/// Cool, wait, probe both sidebands, fit n̄ per delay and regress n̄(t).
pub fn heatrate_loop(cfg: &ExperimentConfig, args: &HeatrateArgs) -> Result<HeatrateReport> {
    if args.delays.len() < 2 || args.delays.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(Error::param("delays", "need at least two finite delays >= 0"));
    }
    let model = cfg.probe_model()?;
    let (cooled, _) = run_cooling(cfg, cfg.n_start, cfg.nbar_initial)?;
    let n_max = cooled.final_distribution.n_max();
    let opts = cfg.integrator_config();
    let red_grid = sideband_grid(cfg, Sideband::Red, None, args.span, args.points)?;
    let blue_grid = sideband_grid(cfg, Sideband::Blue, None, args.span, args.points)?;
    let red_table = ResponseTable::compute(&model, &red_grid, cfg.probe_time_s, n_max, &opts)?;
    let blue_table = ResponseTable::compute(&model, &blue_grid, cfg.probe_time_s, n_max, &opts)?;
    let fixed = SpectraFixed {
        model: model.clone(),
        t_probe: cfg.probe_time_s,
        integrator: opts,
    };
    let mut rng = rng(cfg);
    let mut points = Vec::with_capacity(args.delays.len());
    for &delay in &args.delays {
        let mut p = cooled.final_distribution.populations().to_vec();
        apply_heating(&mut p, cfg.heating_rate, delay);
        let dist = FockDistribution::new(p)?;
        let red = noisy_scan(red_table.scan(&dist)?, args.shots, &mut rng)?;
        let blue = noisy_scan(blue_table.scan(&dist)?, args.shots, &mut rng)?;
        let fit = fit_nbar_spectra(&red, &blue, &fixed, &FitOptions::default())?;
        points.push(DelayPoint {
            delay_s: delay,
            true_nbar: dist.mean_phonon(),
            fit,
            red,
            blue,
        });
    }
    let fit = regress(&heating_data(&points))?;
    Ok(HeatrateReport {
        noise_density: noise_density(fit.rate.value.max(0.0), cfg.nu_z_hz, cfg.mass_amu)?,
        points,
        fit,
        outputs: Vec::new(),
    })
}

fn save_heatrate(report: &mut HeatrateReport, dir: &Path, prefix: &str) -> Result<()> {
    let table = out_file(dir, &format!("{prefix}nbar.csv"))?;
    save_heating_data(&table, &heating_data(&report.points))?;
    report.outputs.push(table);
    for p in &report.points {
        let tag = format!("{prefix}delay_{}ms", 1e3 * p.delay_s);
        for (side, scan) in [("red", &p.red), ("blue", &p.blue)] {
            let path = dir.join(format!("{tag}_{side}.csv"));
            save_scan(&path, scan)?;
            report.outputs.push(path);
        }
    }
    Ok(())
}

pub fn cmd_heatrate(cfg: &ExperimentConfig, args: &HeatrateArgs) -> Result<HeatrateReport> {
    let mut report = heatrate_loop(cfg, args)?;
    if let Some(dir) = &args.out_dir {
        save_heatrate(&mut report, dir, "heatrate_")?;
        write_manifest("heatrate", cfg, &dir.join("manifest.json"), &report.outputs)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMode {
    /// Two scan files, red then blue.
    Spectra,
    /// One red sideband flop file.
    Flop,
    /// One `delay_s,nbar,nbar_err` table.
    Heatrate,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub mode: FitMode,
    /// Probe duration of scan data, s (default: from config).
    #[arg(long)]
    pub probe_time: Option<f64>,
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitReport {
    Nbar(FitResult),
    HeatingRate(HeatingRateFit),
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitReport::Nbar(r) => write!(
                f,
                "nbar = {:.5} +/- {:.5} (residual norm {:.3e}, {} evaluations)",
                r.value, r.std_error, r.residual_norm, r.n_evaluations
            ),
            FitReport::HeatingRate(h) => write!(
                f,
                "heating rate = {:.3} +/- {:.3} 1/s; nbar at t=0 = {:.4} +/- {:.4}",
                h.rate.value, h.rate.std_error, h.intercept, h.intercept_std_error
            ),
        }
    }
}

fn expect_files(args: &FitArgs, n: usize) -> Result<()> {
    if args.files.len() != n {
        return Err(Error::param("files", format!("mode expects {n} file(s), got {}", args.files.len())));
    }
    Ok(())
}

pub fn cmd_fit(cfg: &ExperimentConfig, args: &FitArgs) -> Result<FitReport> {
    let model = cfg.probe_model()?;
    match args.mode {
        FitMode::Spectra => {
            expect_files(args, 2)?;
            let red = load_scan(&args.files[0])?;
            let blue = load_scan(&args.files[1])?;
            let fixed = SpectraFixed {
                model,
                t_probe: args.probe_time.unwrap_or(cfg.probe_time_s),
                integrator: cfg.integrator_config(),
            };
            Ok(FitReport::Nbar(fit_nbar_spectra(&red, &blue, &fixed, &FitOptions::default())?))
        }
        FitMode::Flop => {
            expect_files(args, 1)?;
            let flop = load_flop(&args.files[0])?;
            Ok(FitReport::Nbar(fit_nbar_flop(&flop, model.sideband_rabi, &FitOptions::default())?))
        }
        FitMode::Heatrate => {
            expect_files(args, 1)?;
            Ok(FitReport::HeatingRate(regress(&load_heating_data(&args.files[0])?)?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Red and blue scans after cooling, with the n̄ fit.
    Fig1,
    /// Heating-rate loop over 0, 5 and 10 ms delays.
    Fig2,
    /// Red and blue flops at a 0.35 kHz sideband Rabi frequency.
    Fig3,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long, default_value = "repro")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ReproReport {
    pub summary: String,
    pub outputs: Vec<PathBuf>,
}

impl fmt::Display for ReproReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary)?;
        for o in &self.outputs {
            writeln!(f, "wrote {}", o.display())?;
        }
        Ok(())
    }
}

/// Sideband Rabi frequency of the flop figure, Hz.
pub const FIG3_SIDEBAND_RABI_HZ: f64 = 350.0;
/// n̄ after cooling, used for the scan and flop figures.
pub const COOLED_NBAR: f64 = 0.13;

pub fn cmd_repro(cfg: &ExperimentConfig, args: &ReproArgs) -> Result<ReproReport> {
    let dir = &args.out_dir;
    let mut outputs = Vec::new();
    let summary = match args.figure {
        Figure::Fig1 => {
            let mut scans = Vec::new();
            let mut rng = rng(cfg);
            for sideband in [Sideband::Red, Sideband::Blue] {
                let scan = scan_with_rng(
                    cfg,
                    &ScanArgs {
                        sideband,
                        nbar: COOLED_NBAR,
                        ..ScanArgs::default()
                    },
                    &mut rng,
                )?;
                let path = out_file(dir, &format!("fig1_{}.csv", sideband.as_str()))?;
                save_scan(&path, &scan)?;
                outputs.push(path);
                scans.push(scan);
            }
            let fixed = SpectraFixed {
                model: cfg.probe_model()?,
                t_probe: cfg.probe_time_s,
                integrator: cfg.integrator_config(),
            };
            let fit = fit_nbar_spectra(&scans[0], &scans[1], &fixed, &FitOptions::default())?;
            FitReport::Nbar(fit).to_string()
        }
        Figure::Fig2 => {
            let mut report = heatrate_loop(
                cfg,
                &HeatrateArgs {
                    shots: config_shots(cfg),
                    ..HeatrateArgs::default()
                },
            )?;
            std::fs::create_dir_all(dir)?;
            save_heatrate(&mut report, dir, "fig2_")?;
            outputs = std::mem::take(&mut report.outputs);
            report.to_string()
        }
        Figure::Fig3 => {
            let mut fig_cfg = cfg.clone();
            fig_cfg.sideband_rabi_hz = Some(FIG3_SIDEBAND_RABI_HZ);
            let mut lines = Vec::new();
            for sideband in [Sideband::Red, Sideband::Blue] {
                let flop = flop_data(
                    &fig_cfg,
                    &FlopArgs {
                        sideband,
                        nbar: COOLED_NBAR,
                        ..FlopArgs::default()
                    },
                )?;
                let path = out_file(dir, &format!("fig3_{}.csv", sideband.as_str()))?;
                save_flop(&path, &flop)?;
                let max = flop.p_f1().iter().copied().fold(0.0, f64::max);
                lines.push(format!("{} sideband: max P(F=1) = {max:.4}", sideband.as_str()));
                outputs.push(path);
            }
            lines.join("\n")
        }
    };
    let name = match args.figure {
        Figure::Fig1 => "repro fig1",
        Figure::Fig2 => "repro fig2",
        Figure::Fig3 => "repro fig3",
    };
    write_manifest(name, cfg, &dir.join("manifest.json"), &outputs)?;
    Ok(ReproReport { summary, outputs })
}
