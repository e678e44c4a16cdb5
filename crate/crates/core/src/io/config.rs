use std::collections::BTreeMap;
use std::path::Path;

use crate::cooling::RepumpModel;
use crate::dynamics::{HeatingChannel, IntegratorConfig, Method, ModelKind, ProbeModel, SimOptions};
use crate::error::{Error, Result};
use crate::ion::{IonLevels, TrapParams, YB_P12_LINEWIDTH_HZ};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "IONCOOL_CONFIG";

/// Flat experiment configuration. Defaults are the reference experimental parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mass_amu: f64,
    pub nu_z_hz: f64,
    pub gradient_t_per_m: f64,
    pub b_offset_gauss: f64,
    pub zeeman_splitting_hz: f64,
    pub second_order_splitting_hz: f64,
    pub carrier_rabi_hz: f64,
    pub dressing_rabi_hz: f64,
    /// `None` derives it from the gradient.
    pub sideband_rabi_hz: Option<f64>,
    pub heating_rate: f64,
    pub probe_time_s: f64,
    pub n_start: usize,
    pub nbar_initial: f64,
    pub repump_pi_time_s: f64,
    pub repump_pump_time_s: f64,
    pub repump_swaps: u32,
    pub recoil_quanta: f64,
    pub linewidth_hz: f64,
    pub model: ModelKind,
    pub keep_carrier: bool,
    pub include_minus_coupling: bool,
    pub integrator: Method,
    pub max_step_s: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub seed: u64,
    /// `None` means noiseless.
    pub shots_per_point: Option<u32>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let trap = TrapParams::default();
        let levels = IonLevels::default();
        let rp = RepumpModel::default();
        let ic = IntegratorConfig::default();
        Self {
            mass_amu: trap.mass_amu,
            nu_z_hz: trap.nu_z,
            gradient_t_per_m: trap.gradient,
            b_offset_gauss: trap.b_offset,
            zeeman_splitting_hz: levels.zeeman_splitting,
            second_order_splitting_hz: levels.second_order_splitting,
            carrier_rabi_hz: 61.2e3,
            dressing_rabi_hz: 32e3,
            sideband_rabi_hz: None,
            heating_rate: 41.0,
            probe_time_s: 1270e-6,
            n_start: 500,
            nbar_initial: 65.0,
            repump_pi_time_s: rp.pi_time,
            repump_pump_time_s: rp.pump_time,
            repump_swaps: rp.extra_swaps,
            recoil_quanta: rp.recoil_quanta,
            linewidth_hz: YB_P12_LINEWIDTH_HZ,
            model: ModelKind::Effective,
            keep_carrier: false,
            include_minus_coupling: true,
            integrator: ic.method,
            max_step_s: ic.max_step,
            rel_tol: ic.rel_tol,
            abs_tol: ic.abs_tol,
            seed: 0,
            shots_per_point: Some(100),
        }
    }
}

/// Every accepted key, in canonical order.
pub const CONFIG_KEYS: &[&str] = &[
    "mass_amu",
    "nu_z_hz",
    "gradient_t_per_m",
    "b_offset_gauss",
    "zeeman_splitting_hz",
    "second_order_splitting_hz",
    "carrier_rabi_hz",
    "dressing_rabi_hz",
    "sideband_rabi_hz",
    "heating_rate",
    "probe_time_s",
    "n_start",
    "nbar_initial",
    "repump_pi_time_s",
    "repump_pump_time_s",
    "repump_swaps",
    "recoil_quanta",
    "linewidth_hz",
    "model",
    "keep_carrier",
    "include_minus_coupling",
    "integrator",
    "max_step_s",
    "rel_tol",
    "abs_tol",
    "seed",
    "shots_per_point",
];

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::Config(format!("`{key}`: cannot parse `{value}` as {what}"))
}

fn float(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| bad(key, v, "a number"))
}

fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| bad(key, v, "a non-negative integer"))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, v, "a boolean")),
    }
}

fn auto_or<T>(v: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if v == "auto" || v == "inf" {
        Ok(None)
    } else {
        f(v).map(Some)
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "mass_amu" => self.mass_amu = float(key, v)?,
            "nu_z_hz" => self.nu_z_hz = float(key, v)?,
            "gradient_t_per_m" => self.gradient_t_per_m = float(key, v)?,
            "b_offset_gauss" => self.b_offset_gauss = float(key, v)?,
            "zeeman_splitting_hz" => self.zeeman_splitting_hz = float(key, v)?,
            "second_order_splitting_hz" => self.second_order_splitting_hz = float(key, v)?,
            "carrier_rabi_hz" => self.carrier_rabi_hz = float(key, v)?,
            "dressing_rabi_hz" => self.dressing_rabi_hz = float(key, v)?,
            "sideband_rabi_hz" => self.sideband_rabi_hz = auto_or(v, |s| float(key, s))?,
            "heating_rate" => self.heating_rate = float(key, v)?,
            "probe_time_s" => self.probe_time_s = float(key, v)?,
            "n_start" => self.n_start = int(key, v)?,
            "nbar_initial" => self.nbar_initial = float(key, v)?,
            "repump_pi_time_s" => self.repump_pi_time_s = float(key, v)?,
            "repump_pump_time_s" => self.repump_pump_time_s = float(key, v)?,
            "repump_swaps" => self.repump_swaps = int(key, v)?,
            "recoil_quanta" => self.recoil_quanta = float(key, v)?,
            "linewidth_hz" => self.linewidth_hz = float(key, v)?,
            "model" => self.model = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "keep_carrier" => self.keep_carrier = boolean(key, v)?,
            "include_minus_coupling" => self.include_minus_coupling = boolean(key, v)?,
            "integrator" => {
                self.integrator = match v {
                    "adaptive" => Method::Adaptive,
                    "rk4" | "fixed_step_rk4" => Method::FixedRk4,
                    _ => return Err(bad(key, v, "`adaptive` or `rk4`")),
                }
            }
            "max_step_s" => self.max_step_s = float(key, v)?,
            "rel_tol" => self.rel_tol = float(key, v)?,
            "abs_tol" => self.abs_tol = float(key, v)?,
            "seed" => self.seed = int(key, v)?,
            "shots_per_point" => self.shots_per_point = auto_or(v, |s| int(key, s))?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key `{key}`; valid keys: {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. Nothing is
    /// returned unless every line parses and the result validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if let Some(prev) = seen.insert(k.to_string(), lineno + 1) {
                return Err(Error::Config(format!("line {}: `{k}` already set on line {prev}", lineno + 1)));
            }
            cfg.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), strip(e))))
    }

    /// Applies `key=value` overrides atomically.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut cfg = self.clone();
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not `key=value`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |r: Result<()>| r.map_err(|e| Error::Config(strip(e)));
        wrap(self.probe_model().map(|_| ()))?;
        wrap(self.repump().validate())?;
        wrap(self.integrator_config().validate())?;
        wrap(HeatingChannel::new(self.heating_rate).map(|_| ()))?;
        let checks: [(&str, bool); 5] = [
            ("probe_time_s", self.probe_time_s > 0.0 && self.probe_time_s.is_finite()),
            ("n_start", self.n_start >= 1),
            ("nbar_initial", self.nbar_initial >= 0.0 && self.nbar_initial.is_finite()),
            ("linewidth_hz", self.linewidth_hz >= 0.0 && self.linewidth_hz.is_finite()),
            ("shots_per_point", self.shots_per_point != Some(0)),
        ];
        if let Some((k, _)) = checks.iter().find(|(_, ok)| !ok) {
            return Err(Error::Config(format!("`{k}` is out of range")));
        }
        Ok(())
    }

    pub fn trap(&self) -> TrapParams {
        TrapParams {
            mass_amu: self.mass_amu,
            nu_z: self.nu_z_hz,
            gradient: self.gradient_t_per_m,
            b_offset: self.b_offset_gauss,
        }
    }

    pub fn levels(&self) -> IonLevels {
        IonLevels {
            zeeman_splitting: self.zeeman_splitting_hz,
            second_order_splitting: self.second_order_splitting_hz,
            ..IonLevels::default()
        }
    }

    pub fn probe_model(&self) -> Result<ProbeModel> {
        let mut m = ProbeModel::from_trap(self.trap(), self.levels(), self.carrier_rabi_hz, self.dressing_rabi_hz)?;
        if let Some(s) = self.sideband_rabi_hz {
            m = m.with_sideband_rabi(s)?;
        }
        m.kind = self.model;
        m.keep_carrier = self.keep_carrier;
        m.include_minus_coupling = self.include_minus_coupling;
        Ok(m)
    }

    pub fn heating(&self) -> Result<HeatingChannel> {
        HeatingChannel::new(self.heating_rate)
    }

    pub fn repump(&self) -> RepumpModel {
        RepumpModel {
            pi_time: self.repump_pi_time_s,
            pump_time: self.repump_pump_time_s,
            extra_swaps: self.repump_swaps,
            recoil_quanta: self.recoil_quanta,
        }
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            method: self.integrator,
            max_step: self.max_step_s,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..IntegratorConfig::default()
        }
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            integrator: self.integrator_config(),
            ..SimOptions::default()
        }
    }

    /// Canonical `key -> value` strings in [`CONFIG_KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<String>, none: &str| v.unwrap_or_else(|| none.to_string());
        let values = [
            self.mass_amu.to_string(),
            self.nu_z_hz.to_string(),
            self.gradient_t_per_m.to_string(),
            self.b_offset_gauss.to_string(),
            self.zeeman_splitting_hz.to_string(),
            self.second_order_splitting_hz.to_string(),
            self.carrier_rabi_hz.to_string(),
            self.dressing_rabi_hz.to_string(),
            opt(self.sideband_rabi_hz.map(|v| v.to_string()), "auto"),
            self.heating_rate.to_string(),
            self.probe_time_s.to_string(),
            self.n_start.to_string(),
            self.nbar_initial.to_string(),
            self.repump_pi_time_s.to_string(),
            self.repump_pump_time_s.to_string(),
            self.repump_swaps.to_string(),
            self.recoil_quanta.to_string(),
            self.linewidth_hz.to_string(),
            self.model.as_str().to_string(),
            self.keep_carrier.to_string(),
            self.include_minus_coupling.to_string(),
            match self.integrator {
                Method::Adaptive => "adaptive".to_string(),
                Method::FixedRk4 => "rk4".to_string(),
            },
            self.max_step_s.to_string(),
            self.rel_tol.to_string(),
            self.abs_tol.to_string(),
            self.seed.to_string(),
            opt(self.shots_per_point.map(|v| v.to_string()), "inf"),
        ];
        CONFIG_KEYS.iter().copied().zip(values).collect()
    }

    pub fn to_text(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(s) => s,
        other => other.to_string(),
    }
}
