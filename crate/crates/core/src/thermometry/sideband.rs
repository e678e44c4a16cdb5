use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::ion::Sideband;
use crate::quantum::thermal_distribution;

/// Largest thermal tail beyond the cutoff accepted by [`sideband_probability`].
pub const TAIL_LIMIT: f64 = 1e-6;

/// Default Fock cutoff `⌈20(n̄ + 1)⌉` for thermal sums.
pub fn eq_cutoff(n_bar: f64) -> usize {
    (20.0 * (n_bar.max(0.0) + 1.0)).ceil() as usize
}

/// Thermal-state sideband transfer `Σ p_n (1 − cos(2π Ω_n t))/2` with
/// `Ω_n = eta_omega·√n` (red) or `eta_omega·√(n+1)` (blue), in Hz.
pub fn sideband_probability(t: f64, sign: Sideband, n_bar: f64, eta_omega: f64, n_max: usize) -> Result<f64> {
    let dist = thermal_distribution(n_bar, n_max)?;
    if dist.truncation_loss() > TAIL_LIMIT {
        return Err(Error::Truncation(format!(
            "thermal tail {:.3e} beyond n_max={n_max} for n_bar={n_bar}",
            dist.truncation_loss()
        )));
    }
    if !(eta_omega >= 0.0) || !eta_omega.is_finite() {
        return Err(Error::param("eta_omega", format!("must be finite and >= 0, got {eta_omega}")));
    }
    Ok(thermal_sum(t, sign, dist.populations(), eta_omega))
}

pub(crate) fn thermal_sum(t: f64, sign: Sideband, pops: &[f64], eta_omega: f64) -> f64 {
    let shift = match sign {
        Sideband::Red => 0.0,
        Sideband::Blue => 1.0,
    };
    pops.iter()
        .enumerate()
        .map(|(n, p)| p * (1.0 - (TAU * eta_omega * (n as f64 + shift).sqrt() * t).cos()) / 2.0)
        .sum()
}

/// Red-to-blue sideband ratio `r = n̄/(n̄+1)` of a thermal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandRatio(f64);

impl SidebandRatio {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::param("r", format!("sideband ratio must lie in [0, 1), got {r}")));
        }
        Ok(Self(r))
    }

    pub fn from_probabilities(red: f64, blue: f64) -> Result<Self> {
        if !(blue > 0.0) {
            return Err(Error::param("blue", "blue sideband probability must be > 0"));
        }
        Self::new(red / blue)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn ratio_to_nbar(r: SidebandRatio) -> f64 {
    r.0 / (1.0 - r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ground_state_limits() {
        for t in [0.0, 1e-4, 3e-3] {
            assert_eq!(sideband_probability(t, Sideband::Red, 0.0, 350.0, 20).unwrap(), 0.0);
        }
        let p = sideband_probability(1.0 / 700.0, Sideband::Blue, 0.0, 350.0, 20).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-15);
        assert!(sideband_probability(1e-3, Sideband::Red, -0.1, 350.0, 20).is_err());
        assert!(sideband_probability(1e-3, Sideband::Red, 5.0, 350.0, 10).is_err());
    }

    #[test]
    fn small_time_ratio() {
        let eo = 392.0;
        let t = 1e-3 / eo;
        let r = sideband_probability(t, Sideband::Red, 0.13, eo, 60).unwrap()
            / sideband_probability(t, Sideband::Blue, 0.13, eo, 60).unwrap();
        assert!((r - 0.13 / 1.13).abs() < 1e-3);
        assert!((r - 0.115).abs() < 1e-3);
    }

    #[test]
    fn ratio_conversion() {
        assert_eq!(ratio_to_nbar(SidebandRatio::new(0.0).unwrap()), 0.0);
        assert_eq!(ratio_to_nbar(SidebandRatio::new(0.5).unwrap()), 1.0);
        assert!((ratio_to_nbar(SidebandRatio::new(0.115).unwrap()) - 0.13).abs() < 0.001);
        assert!(SidebandRatio::new(1.0).is_err());
        assert!(SidebandRatio::new(-0.01).is_err());
    }

    #[test]
    fn matches_direct_oracle() {
        // independent summation over an untruncated geometric series
        let (nb, eo, t) = (2.0f64, 310.0, 2.3e-3);
        let q = nb / (nb + 1.0);
        let oracle: f64 = (0..2000)
            .map(|n| {
                let p = q.powi(n) / (nb + 1.0);
                p * (1.0 - (TAU * eo * ((n + 1) as f64).sqrt() * t).cos()) / 2.0
            })
            .sum();
        let p = sideband_probability(t, Sideband::Blue, nb, eo, eq_cutoff(nb)).unwrap();
        assert!((p - oracle).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn ratio_inverts(n_bar in 0.0f64..50.0) {
            let r = SidebandRatio::new(n_bar / (n_bar + 1.0)).unwrap();
            prop_assert!((ratio_to_nbar(r) - n_bar).abs() < 1e-9 * (1.0 + n_bar));
        }

        #[test]
        fn red_below_blue(n_bar in 0.0f64..5.0, t in 0.0f64..1e-4) {
            let red = sideband_probability(t, Sideband::Red, n_bar, 392.0, eq_cutoff(n_bar)).unwrap();
            let blue = sideband_probability(t, Sideband::Blue, n_bar, 392.0, eq_cutoff(n_bar)).unwrap();
            prop_assert!(red <= blue + 1e-15);
            prop_assert!((0.0..=1.0).contains(&red));
        }
    }
}
