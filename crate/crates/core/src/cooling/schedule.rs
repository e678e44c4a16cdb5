use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    RedSideband,
    Repump,
}

impl PulseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PulseKind::RedSideband => "red_sideband",
            PulseKind::Repump => "repump",
        }
    }
}

impl std::str::FromStr for PulseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red_sideband" => Ok(PulseKind::RedSideband),
            "repump" => Ok(PulseKind::Repump),
            other => Err(Error::param("kind", format!("expected `red_sideband` or `repump`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Seconds.
    pub duration: f64,
    /// Fock level whose π-time sets `duration`; sideband pulses only.
    pub target_n: Option<usize>,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::param("duration", format!("must be > 0, got {}", self.duration)));
        }
        match (self.kind, self.target_n) {
            (PulseKind::RedSideband, None) => Err(Error::param("target_n", "sideband pulse needs a target level")),
            (PulseKind::RedSideband, Some(0)) => Err(Error::param("target_n", "red sideband target must be >= 1")),
            (PulseKind::Repump, Some(_)) => Err(Error::param("target_n", "repump pulses carry no target level")),
            _ => Ok(()),
        }
    }
}

/// Internal-state reset between sideband pulses: `extra_swaps` π-pulses
/// plus optical pumping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepumpModel {
    pub pi_time: f64,
    pub pump_time: f64,
    pub extra_swaps: u32,
    /// Mean phonons added to each transferred ion per repump.
    pub recoil_quanta: f64,
}

impl Default for RepumpModel {
    fn default() -> Self {
        Self {
            pi_time: 14e-6,
            pump_time: 6e-6,
            extra_swaps: 2,
            recoil_quanta: 0.0,
        }
    }
}

impl RepumpModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pi_time", self.pi_time),
            ("pump_time", self.pump_time),
            ("recoil_quanta", self.recoil_quanta),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.duration() > 0.0) {
            return Err(Error::param("repump", "cycle duration must be > 0"));
        }
        Ok(())
    }

    /// Wall-clock length of one repump cycle, s.
    pub fn duration(&self) -> f64 {
        f64::from(self.extra_swaps) * self.pi_time + self.pump_time
    }
}

/// Ordered pulses plus the parameters they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pulses: Vec<PulseSpec>,
    n_start: usize,
    /// Red sideband Rabi frequency from n = 1, Hz.
    sideband_rabi_1: f64,
}

impl PulseSchedule {
    /// Checks that sideband targets strictly decrease and that every sideband
    /// pulse is followed by a repump.
    pub fn new(pulses: Vec<PulseSpec>, n_start: usize, sideband_rabi_1: f64) -> Result<Self> {
        if !(sideband_rabi_1 > 0.0) || !sideband_rabi_1.is_finite() {
            return Err(Error::param("sideband_rabi_1", format!("must be > 0, got {sideband_rabi_1}")));
        }
        let mut last_target = usize::MAX;
        for (i, p) in pulses.iter().enumerate() {
            p.validate()?;
            if let Some(n) = p.target_n {
                if n >= last_target {
                    return Err(Error::param("pulses", format!("pulse {i}: sideband targets must strictly decrease")));
                }
                last_target = n;
                if pulses.get(i + 1).map(|q| q.kind) != Some(PulseKind::Repump) {
                    return Err(Error::param("pulses", format!("pulse {i}: sideband pulse must be followed by a repump")));
                }
            }
        }
        Ok(Self {
            pulses,
            n_start,
            sideband_rabi_1,
        })
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn n_start(&self) -> usize {
        self.n_start
    }

    pub fn sideband_rabi_1(&self) -> f64 {
        self.sideband_rabi_1
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }
}

/// π-times `t_n = 1/(2 Ω₁ √n)` for n = `n_start` down to 1, each followed by
/// a repump.
pub fn build_schedule(n_start: usize, sideband_rabi_1: f64, repump: RepumpModel) -> Result<PulseSchedule> {
    if n_start < 1 {
        return Err(Error::param("n_start", "must be >= 1"));
    }
    repump.validate()?;
    if !(sideband_rabi_1 > 0.0) || !sideband_rabi_1.is_finite() {
        return Err(Error::param("sideband_rabi_1", format!("must be > 0, got {sideband_rabi_1}")));
    }
    let t1 = 1.0 / (2.0 * sideband_rabi_1);
    let mut pulses = Vec::with_capacity(2 * n_start);
    for n in (1..=n_start).rev() {
        pulses.push(PulseSpec {
            kind: PulseKind::RedSideband,
            duration: t1 / (n as f64).sqrt(),
            target_n: Some(n),
        });
        pulses.push(PulseSpec {
            kind: PulseKind::Repump,
            duration: repump.duration(),
            target_n: None,
        });
    }
    PulseSchedule::new(pulses, n_start, sideband_rabi_1)
}

/// `sin²(π Ω₁ √n t)`: red sideband transfer out of `|0', n⟩`.
pub fn pulse_transfer_probability(n: usize, duration: f64, sideband_rabi_1: f64) -> f64 {
    (std::f64::consts::PI * sideband_rabi_1 * (n as f64).sqrt() * duration).sin().powi(2)
}

/// Time split of a pulse sequence, s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScheduleTime {
    pub sideband: f64,
    pub repump: f64,
    pub total: f64,
}

pub fn pulses_total_time(pulses: &[PulseSpec]) -> ScheduleTime {
    let mut t = ScheduleTime::default();
    for p in pulses {
        match p.kind {
            PulseKind::RedSideband => t.sideband += p.duration,
            PulseKind::Repump => t.repump += p.duration,
        }
    }
    t.total = t.sideband + t.repump;
    t
}

pub fn schedule_total_time(schedule: &PulseSchedule) -> ScheduleTime {
    pulses_total_time(schedule.pulses())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_pulse_pi_time() {
        let s = build_schedule(1, 350.0, RepumpModel::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s.pulses()[0].duration, 1.0 / 700.0, max_relative = 1e-15);
        assert_relative_eq!(s.pulses()[0].duration, 1.4286e-3, max_relative = 1e-4);
        assert_relative_eq!(s.pulses()[1].duration, 34e-6, max_relative = 1e-12);
    }

    #[test]
    fn sqrt_scaling_of_pulse_times() {
        let s = build_schedule(4, 392.0, RepumpModel::default()).unwrap();
        let t = |n: usize| s.pulses().iter().find(|p| p.target_n == Some(n)).unwrap().duration;
        assert_relative_eq!(t(4), t(1) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn long_schedule_totals() {
        let s = build_schedule(500, 392.0, RepumpModel::default()).unwrap();
        let t1 = 1.0 / 784.0;
        let oracle: f64 = (1..=500).map(|n| t1 / (n as f64).sqrt()).sum();
        let tt = schedule_total_time(&s);
        assert_relative_eq!(tt.sideband, oracle, max_relative = 1e-12);
        assert!((tt.sideband - 55e-3).abs() < 1e-3, "{}", tt.sideband);
        assert_relative_eq!(tt.repump, 500.0 * 34e-6, max_relative = 1e-12);
        assert!((tt.total - 71e-3).abs() < 7.1e-3);
    }

    #[test]
    fn totals_add_over_concatenation() {
        let s = build_schedule(30, 392.0, RepumpModel::default()).unwrap();
        assert_eq!(pulses_total_time(&[]).total, 0.0);
        for cut in [0, 7, 31, 60] {
            let (a, b) = s.pulses().split_at(cut);
            let whole = schedule_total_time(&s).total;
            assert_relative_eq!(pulses_total_time(a).total + pulses_total_time(b).total, whole, max_relative = 1e-12);
        }
    }

    #[test]
    fn transfer_probabilities() {
        let t1 = 1.0 / (2.0 * 392.0);
        assert_relative_eq!(pulse_transfer_probability(1, t1, 392.0), 1.0, epsilon = 1e-15);
        assert_eq!(pulse_transfer_probability(0, t1, 392.0), 0.0);
        let want = (std::f64::consts::FRAC_PI_2 * 2f64.sqrt()).sin().powi(2);
        assert_relative_eq!(pulse_transfer_probability(2, t1, 392.0), want, epsilon = 1e-15);
        assert!((want - 0.633).abs() < 1e-3);
    }

    #[test]
    fn schedule_rejects_bad_structure() {
        assert!(build_schedule(0, 392.0, RepumpModel::default()).is_err());
        assert!(build_schedule(3, 0.0, RepumpModel::default()).is_err());
        let sb = |n| PulseSpec { kind: PulseKind::RedSideband, duration: 1e-3, target_n: Some(n) };
        let rp = PulseSpec { kind: PulseKind::Repump, duration: 3e-5, target_n: None };
        assert!(PulseSchedule::new(vec![sb(1), rp, sb(2), rp], 2, 392.0).is_err());
        assert!(PulseSchedule::new(vec![sb(2), sb(1), rp], 2, 392.0).is_err());
        assert!(PulseSchedule::new(vec![sb(2), rp, sb(1), rp], 2, 392.0).is_ok());
    }
}
