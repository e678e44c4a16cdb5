use super::basis::FockBasis;
use super::state::DensityMatrix;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-9;

/// Motional populations `p_0 … p_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    populations: Vec<f64>,
    truncation_loss: f64,
}

impl FockDistribution {
    pub fn new(populations: Vec<f64>) -> Result<Self> {
        Self::with_loss(populations, 0.0)
    }

    pub(crate) fn with_loss(populations: Vec<f64>, truncation_loss: f64) -> Result<Self> {
        if populations.len() < 2 {
            return Err(Error::param("populations", "need at least two Fock levels"));
        }
        if let Some((n, p)) = populations
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidState(format!("p_{n} = {p} is not a probability")));
        }
        let sum: f64 = populations.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidState(format!("populations sum to {sum}, not 1")));
        }
        Ok(Self {
            populations,
            truncation_loss,
        })
    }

    /// Single Fock state `|n⟩` in a basis holding `n_max`.
    pub fn fock_state(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::param("n", format!("{n} exceeds n_max {n_max}")));
        }
        let mut p = vec![0.0; n_max.max(1) + 1];
        p[n] = 1.0;
        Self::new(p)
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::fock_state(0, n_max).expect("vacuum is always valid")
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn into_populations(self) -> Vec<f64> {
        self.populations
    }

    pub fn p(&self, n: usize) -> f64 {
        self.populations.get(n).copied().unwrap_or(0.0)
    }

    pub fn n_max(&self) -> usize {
        self.populations.len() - 1
    }

    pub fn basis(&self) -> FockBasis {
        FockBasis::new(self.n_max()).expect("length checked at construction")
    }

    /// Probability discarded when the distribution was cut to `n_max`.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub fn top_population(&self) -> f64 {
        *self.populations.last().unwrap()
    }

    /// Re-embed into a basis with cutoff `n_max`; fails if that would drop
    /// more than `1e-9` of probability.
    pub fn resized(&self, n_max: usize) -> Result<Self> {
        let mut p = self.populations.clone();
        if n_max < self.n_max() {
            let dropped: f64 = p[n_max + 1..].iter().sum();
            if dropped > SUM_TOL {
                return Err(Error::Truncation(format!(
                    "resizing to n_max={n_max} drops {dropped:.3e} probability"
                )));
            }
            p.truncate(n_max + 1);
        } else {
            p.resize(n_max + 1, 0.0);
        }
        Self::with_loss(p, self.truncation_loss)
    }
}

/// Smallest `n_max` for which the geometric tail beyond it is below `tail`.
pub fn thermal_tail_cutoff(n_bar: f64, tail: f64) -> usize {
    if n_bar <= 0.0 {
        return 1;
    }
    let q = n_bar / (n_bar + 1.0);
    // tail = q^(n_max + 1)
    let n = (tail.ln() / q.ln()).ceil() as usize;
    n.max(2) - 1
}

/// Thermal (geometric) populations `p_n = q^n / (n̄ + 1)`, `q = n̄/(n̄+1)`,
/// truncated at `n_max` and renormalized. The discarded tail is kept as
/// [`FockDistribution::truncation_loss`].
pub fn thermal_distribution(n_bar: f64, n_max: usize) -> Result<FockDistribution> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(Error::param("n_bar", format!("must be finite and >= 0, got {n_bar}")));
    }
    if n_max < 1 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let q = n_bar / (n_bar + 1.0);
    let mut p = Vec::with_capacity(n_max + 1);
    let mut term = 1.0 / (n_bar + 1.0);
    for _ in 0..=n_max {
        p.push(term);
        term *= q;
    }
    let loss = q.powi(n_max as i32 + 1);
    let sum: f64 = p.iter().sum();
    for x in &mut p {
        *x /= sum;
    }
    FockDistribution::with_loss(p, loss)
}

/// Anything with a mean phonon number.
pub trait MeanPhonon {
    fn mean_phonon(&self) -> f64;
}

impl MeanPhonon for FockDistribution {
    fn mean_phonon(&self) -> f64 {
        self.populations
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

impl MeanPhonon for DensityMatrix {
    fn mean_phonon(&self) -> f64 {
        self.fock_diagonal()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

pub fn mean_phonon(d: &impl MeanPhonon) -> f64 {
    d.mean_phonon()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ground_state_at_zero_temperature() {
        let d = thermal_distribution(0.0, 10).unwrap();
        assert_eq!(d.p(0), 1.0);
        assert!(d.populations()[1..].iter().all(|&p| p == 0.0));
        assert_eq!(d.truncation_loss(), 0.0);
    }

    #[test]
    fn doppler_cooled_ground_population() {
        // closed form 1/(n̄+1) before renormalization; tail at 2000 is ~1e-13
        let d = thermal_distribution(65.0, 2000).unwrap();
        assert_relative_eq!(d.p(0), 1.0 / 66.0, max_relative = 1e-9);
        assert_relative_eq!(d.p(0), 0.015152, epsilon = 1e-6);
    }

    #[test]
    fn cooled_ground_population() {
        let d = thermal_distribution(0.13, 30).unwrap();
        assert_relative_eq!(d.p(0), 1.0 / 1.13, max_relative = 1e-12);
        assert!((d.p(0) - 0.885).abs() < 5e-4);
    }

    #[test]
    fn rejects_negative() {
        assert!(thermal_distribution(-0.1, 10).is_err());
        assert!(thermal_distribution(f64::NAN, 10).is_err());
    }

    #[test]
    fn truncation_loss_recorded() {
        let d = thermal_distribution(2.0, 5).unwrap();
        assert_relative_eq!(d.truncation_loss(), (2.0f64 / 3.0).powi(6), max_relative = 1e-12);
    }

    #[test]
    fn mean_examples() {
        assert_eq!(FockDistribution::vacuum(4).mean_phonon(), 0.0);
        let d = FockDistribution::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(mean_phonon(&d), 0.5);
        let d = thermal_distribution(65.0, 2000).unwrap();
        assert!((d.mean_phonon() - 65.0).abs() < 0.065);
    }

    #[test]
    fn cutoff_meets_tail() {
        for &nb in &[0.01, 0.13, 2.0, 65.0] {
            let n = thermal_tail_cutoff(nb, 1e-6);
            let d = thermal_distribution(nb, n).unwrap();
            assert!(d.truncation_loss() < 1e-6, "n̄={nb}");
        }
    }

    #[test]
    fn resize_guards_probability() {
        let d = thermal_distribution(1.0, 40).unwrap();
        assert!(d.resized(5).is_err());
        let up = d.resized(60).unwrap();
        assert_eq!(up.n_max(), 60);
        assert_eq!(up.p(50), 0.0);
    }

    proptest! {
        #[test]
        fn thermal_normalized(n_bar in 0.0f64..200.0, n_max in 1usize..3000) {
            let d = thermal_distribution(n_bar, n_max).unwrap();
            let s: f64 = d.populations().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(d.populations().iter().all(|&p| p >= 0.0));
        }

        #[test]
        fn thermal_mean_converges(n_bar in 0.0f64..100.0) {
            let n_max = (20.0 * (n_bar + 1.0)).ceil() as usize;
            let d = thermal_distribution(n_bar, n_max).unwrap();
            let err = (d.mean_phonon() - n_bar).abs();
            prop_assert!(err <= 1e-6 * n_bar.max(1e-300) || err < 1e-12);
        }
    }
}
