use super::sideband::{eq_cutoff, thermal_sum};
use crate::dynamics::{FlopResult, IntegratorConfig, ProbeModel, ResponseTable, ScanResult};
use crate::error::{Error, Result};
use crate::ion::Sideband;
use crate::quantum::thermal_distribution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub value: f64,
    /// From the curvature of the residual sum at the optimum.
    pub std_error: f64,
    /// `√(Σ residual²)`, weighted where the fit is weighted.
    pub residual_norm: f64,
    pub n_evaluations: usize,
}

/// Search interval and stopping rule for one-parameter fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub lower: f64,
    /// Upper end of the search; `None` picks a data-driven bound.
    pub upper: Option<f64>,
    /// Coarse grid used to bracket the minimum.
    pub grid_points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: None,
            grid_points: 41,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub fx: f64,
    pub n_evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Grid bracketing followed by golden-section refinement on `[lo, hi]`.
/// A minimum on the upper edge is reported as a convergence failure.
pub fn minimize_scalar<F>(mut f: F, lo: f64, hi: f64, opts: &FitOptions) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param("bracket", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    let m = opts.grid_points.max(3);
    let mut evals = 0;
    let grid: Vec<f64> = (0..m).map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64).collect();
    let mut values = Vec::with_capacity(m);
    for &x in &grid {
        values.push(f(x)?);
        evals += 1;
    }
    let k = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("grid is non-empty");
    if k == m - 1 {
        return Err(Error::Convergence(format!(
            "minimum at upper bracket edge {hi} (objective {:.4e}, next {:.4e} at {})",
            values[k],
            values[k - 1],
            grid[k - 1]
        )));
    }
    let mut a = grid[k.saturating_sub(1)];
    let mut b = grid[k + 1];
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    evals += 2;
    let mut best = (grid[k], values[k]);
    while (b - a) > opts.rel_tol * best.0.abs() + opts.abs_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evals += 1;
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best.1 {
                best = (x, v);
            }
        }
        if evals > 10_000 {
            return Err(Error::Convergence(format!("golden section stalled in [{a}, {b}]")));
        }
    }
    Ok(ScalarMinimum {
        x: best.0,
        fx: best.1,
        n_evaluations: evals,
    })
}

/// Standard error `√(2σ²/S'')` with `σ² = S/(N − 1)` from a finite-difference
/// second derivative of the residual sum `S`, one-sided at the lower bound.
fn curvature_error<F>(f: &mut F, min: &ScalarMinimum, n_points: usize, lower: f64) -> Result<(f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let x = min.x;
    let h = 1e-3 * x.abs().max(1e-2);
    let s2 = if x - h >= lower {
        (f(x + h)? - 2.0 * min.fx + f(x - h)?) / (h * h)
    } else {
        (min.fx - 2.0 * f(x + h)? + f(x + 2.0 * h)?) / (h * h)
    };
    if n_points < 2 {
        return Ok((f64::INFINITY, 2));
    }
    let sigma2 = min.fx / (n_points - 1) as f64;
    let err = if s2 > 0.0 { (2.0 * sigma2 / s2).sqrt() } else { f64::INFINITY };
    Ok((err, 2))
}

fn finish<F>(mut f: F, min: ScalarMinimum, n_points: usize, lower: f64) -> Result<FitResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (std_error, extra) = curvature_error(&mut f, &min, n_points, lower)?;
    Ok(FitResult {
        value: min.x,
        std_error,
        residual_norm: min.fx.max(0.0).sqrt(),
        n_evaluations: min.n_evaluations + extra,
    })
}

/// Parameters held fixed while fitting spectra.
#[derive(Debug, Clone)]
pub struct SpectraFixed {
    pub model: ProbeModel,
    pub t_probe: f64,
    pub integrator: IntegratorConfig,
}

impl SpectraFixed {
    pub fn new(model: ProbeModel, t_probe: f64) -> Self {
        Self {
            model,
            t_probe,
            integrator: IntegratorConfig::default(),
        }
    }
}

fn sse(model: &[f64], data: &[f64]) -> f64 {
    model.iter().zip(data).map(|(m, d)| (m - d) * (m - d)).sum()
}

/// Upper search bound from the red/blue peak ratio.
fn spectra_upper(red: &ScanResult, blue: &ScanResult) -> f64 {
    let peak = |s: &ScanResult| s.p_f1().iter().copied().fold(0.0, f64::max);
    let b = peak(blue);
    let r = if b > 0.0 { (peak(red) / b).clamp(0.0, 0.9) } else { 0.9 };
    (4.0 * r / (1.0 - r) + 1.0).min(SPECTRA_UPPER_CAP)
}

const SPECTRA_UPPER_CAP: f64 = 40.0;

/// Least-squares `n̄ ≥ 0` for a thermal state probed on both sidebands.
pub fn fit_nbar_spectra(red: &ScanResult, blue: &ScanResult, fixed: &SpectraFixed, opts: &FitOptions) -> Result<FitResult> {
    if red.is_empty() || blue.is_empty() {
        return Err(Error::param("scans", "both sideband scans must be non-empty"));
    }
    let mut upper = opts.upper.unwrap_or_else(|| spectra_upper(red, blue));
    loop {
        let n_max = eq_cutoff(upper);
        let red_table = ResponseTable::compute(&fixed.model, red.detuning_hz(), fixed.t_probe, n_max, &fixed.integrator)?;
        let blue_table = ResponseTable::compute(&fixed.model, blue.detuning_hz(), fixed.t_probe, n_max, &fixed.integrator)?;
        let objective = |nb: f64| -> Result<f64> {
            let dist = thermal_distribution(nb, n_max)?;
            Ok(sse(&red_table.contract(&dist)?, red.p_f1()) + sse(&blue_table.contract(&dist)?, blue.p_f1()))
        };
        match minimize_scalar(objective, opts.lower, upper, opts) {
            Ok(min) => return finish(objective, min, red.len() + blue.len(), opts.lower),
            Err(Error::Convergence(_)) if opts.upper.is_none() && upper < SPECTRA_UPPER_CAP => {
                upper = (2.0 * upper).min(SPECTRA_UPPER_CAP);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Default upper bound for flop fits.
const FLOP_UPPER: f64 = 200.0;

/// Least-squares `n̄ ≥ 0` of a red sideband flop against the thermal
/// transfer formula with sideband Rabi frequency `eta_omega` (Hz).
pub fn fit_nbar_flop(flop: &FlopResult, eta_omega: f64, opts: &FitOptions) -> Result<FitResult> {
    if flop.is_empty() {
        return Err(Error::param("flop", "no data points"));
    }
    if !(eta_omega > 0.0) {
        return Err(Error::param("eta_omega", format!("must be > 0, got {eta_omega}")));
    }
    let upper = opts.upper.unwrap_or(FLOP_UPPER);
    let n_max = eq_cutoff(upper);
    let objective = |nb: f64| -> Result<f64> {
        let dist = thermal_distribution(nb, n_max)?;
        let pops = dist.populations();
        Ok(flop
            .time_s()
            .iter()
            .zip(flop.p_f1())
            .map(|(&t, &p)| {
                let m = thermal_sum(t, Sideband::Red, pops, eta_omega);
                (m - p) * (m - p)
            })
            .sum())
    };
    let min = minimize_scalar(objective, opts.lower, upper, opts)?;
    finish(objective, min, flop.len(), opts.lower)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingRateFit {
    /// Slope `ṅ`, quanta/s.
    pub rate: FitResult,
    /// `n̄` at zero delay.
    pub intercept: f64,
    pub intercept_std_error: f64,
}

/// Linear regression `n̄(t) = n̄₀ + ṅ t`, weighted by `1/σ²` when every
/// error in `errors` is positive and unweighted otherwise.
pub fn fit_heating_rate(delays: &[f64], nbars: &[f64], errors: &[f64]) -> Result<HeatingRateFit> {
    let n = delays.len();
    if nbars.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: nbars.len() });
    }
    if !errors.is_empty() && errors.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: errors.len() });
    }
    if n < 2 {
        return Err(Error::param("delays", "need at least two points"));
    }
    if delays.iter().chain(nbars).chain(errors).any(|v| !v.is_finite()) {
        return Err(Error::param("delays", "inputs must be finite"));
    }
    let weighted = !errors.is_empty() && errors.iter().all(|&s| s > 0.0);
    let w: Vec<f64> = if weighted {
        errors.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; n]
    };
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(delays).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(nbars).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(delays).map(|(w, x)| w * (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::param("delays", "need at least two distinct delays"));
    }
    let sxy: f64 = (0..n).map(|i| w[i] * (delays[i] - mx) * (nbars[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = (0..n)
        .map(|i| {
            let r = nbars[i] - intercept - slope * delays[i];
            w[i] * r * r
        })
        .sum();
    // Weighted: errors are taken as absolute. Unweighted: scatter sets σ².
    let scale = if weighted {
        1.0
    } else if n > 2 {
        chi2 / (n - 2) as f64
    } else {
        f64::INFINITY
    };
    let slope_var = scale / sxx;
    let intercept_var = scale * (1.0 / sw + mx * mx / sxx);
    let guard = |v: f64| if v.is_nan() { f64::INFINITY } else { v.sqrt() };
    Ok(HeatingRateFit {
        rate: FitResult {
            value: slope,
            std_error: guard(slope_var),
            residual_norm: chi2.sqrt(),
            n_evaluations: 1,
        },
        intercept,
        intercept_std_error: guard(intercept_var),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{linear_grid, simulate_scan, HeatingChannel, Shots, SimOptions};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn minimizer_finds_parabola_vertex() {
        let m = minimize_scalar(|x| Ok((x - 1.234).powi(2) + 3.0), 0.0, 10.0, &FitOptions::default()).unwrap();
        assert!((m.x - 1.234).abs() < 1e-5);
        assert!(minimize_scalar(|x| Ok(-x), 0.0, 1.0, &FitOptions::default()).is_err());
        let edge = minimize_scalar(Ok, 0.0, 1.0, &FitOptions::default()).unwrap();
        assert_eq!(edge.x, 0.0);
    }

    #[test]
    fn heating_rate_from_constructed_points() {
        let f = fit_heating_rate(&[0.0, 5e-3, 10e-3], &[0.13, 0.335, 0.54], &[]).unwrap();
        assert_relative_eq!(f.rate.value, 41.0, max_relative = 1e-10);
        assert_relative_eq!(f.intercept, 0.13, max_relative = 1e-10);
        assert!(f.rate.residual_norm < 1e-12);
        let w = fit_heating_rate(&[0.0, 5e-3, 10e-3], &[0.13, 0.335, 0.54], &[0.04, 0.05, 0.05]).unwrap();
        assert_relative_eq!(w.rate.value, 41.0, max_relative = 1e-10);
        let flat = fit_heating_rate(&[0.0, 5e-3], &[0.2, 0.2], &[]).unwrap();
        assert_eq!(flat.rate.value, 0.0);
        assert!(fit_heating_rate(&[1.0, 1.0], &[0.1, 0.2], &[]).is_err());
        assert!(fit_heating_rate(&[1.0], &[0.1], &[]).is_err());
    }

    #[test]
    fn weighting_pulls_towards_precise_points() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 1.0, 3.0];
        let loose_last = fit_heating_rate(&x, &y, &[0.01, 0.01, 10.0]).unwrap();
        assert!((loose_last.rate.value - 1.0).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn slope_ignores_offsets(c in -5.0f64..5.0, slope in 0.0f64..100.0) {
            let x = [0.0, 5e-3, 10e-3, 12e-3];
            let y: Vec<f64> = x.iter().enumerate().map(|(i, t)| 0.1 + slope * t + 0.01 * (i as f64).sin()).collect();
            let y2: Vec<f64> = y.iter().map(|v| v + c).collect();
            let a = fit_heating_rate(&x, &y, &[]).unwrap();
            let b = fit_heating_rate(&x, &y2, &[]).unwrap();
            prop_assert!((a.rate.value - b.rate.value).abs() < 1e-8 * (1.0 + slope));
        }

        #[test]
        fn collinear_points_have_zero_residual(n0 in 0.0f64..2.0, slope in 0.0f64..100.0) {
            let x = [0.0, 3e-3, 7e-3, 10e-3];
            let y: Vec<f64> = x.iter().map(|t| n0 + slope * t).collect();
            let f = fit_heating_rate(&x, &y, &[]).unwrap();
            prop_assert!(f.rate.residual_norm < 1e-12);
            prop_assert!((f.rate.value - slope).abs() < 1e-9 * (1.0 + slope));
        }
    }

    fn red_flop(n_bar: f64, eta_omega: f64) -> FlopResult {
        let times: Vec<f64> = (1..=50).map(|k| k as f64 * 2e-5).collect();
        let n_max = eq_cutoff(n_bar);
        let d = thermal_distribution(n_bar, n_max).unwrap();
        let p = times.iter().map(|&t| thermal_sum(t, Sideband::Red, d.populations(), eta_omega)).collect();
        FlopResult::new(times, p, Shots::Exact).unwrap()
    }

    #[test]
    fn flop_fit_roundtrip() {
        let f = fit_nbar_flop(&red_flop(65.0, 392.0), 392.0, &FitOptions::default()).unwrap();
        assert!((f.value - 65.0).abs() < 65.0 * 1e-4, "{}", f.value);
        let z = fit_nbar_flop(&red_flop(0.0, 392.0), 392.0, &FitOptions::default()).unwrap();
        assert!(z.value < 1e-6);
    }

    #[test]
    fn flop_fit_with_shot_noise() {
        let truth = red_flop(65.0, 392.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let noisy = truth.with_shot_noise(100, &mut rng).unwrap();
            let f = fit_nbar_flop(&noisy, 392.0, &FitOptions::default()).unwrap();
            assert!((f.value - 65.0).abs() < 5.0, "{}", f.value);
            assert!(f.std_error > 0.0 && f.std_error < 10.0);
        }
    }

    fn scans(n_bar: f64) -> (ScanResult, ScanResult, SpectraFixed) {
        let model = ProbeModel::default();
        let nu = model.nu_z();
        let d = thermal_distribution(n_bar, eq_cutoff(n_bar)).unwrap();
        let opts = SimOptions::default();
        let red = simulate_scan(&model, &linear_grid(-nu, 6e3, 61).unwrap(), 1270e-6, &d, HeatingChannel::none(), &opts).unwrap();
        let blue = simulate_scan(&model, &linear_grid(nu, 6e3, 61).unwrap(), 1270e-6, &d, HeatingChannel::none(), &opts).unwrap();
        (red, blue, SpectraFixed::new(model, 1270e-6))
    }

    #[test]
    fn spectra_fit_roundtrip() {
        for truth in [0.0, 0.13, 1.7] {
            let (red, blue, fixed) = scans(truth);
            let f = fit_nbar_spectra(&red, &blue, &fixed, &FitOptions::default()).unwrap();
            assert!((f.value - truth).abs() <= 1e-4 * truth.max(1e-2), "{truth}: {}", f.value);
        }
    }

    #[test]
    fn spectra_fit_rejects_empty() {
        let (red, _, fixed) = scans(0.13);
        let empty = ScanResult::new(vec![], vec![], Shots::Exact).unwrap();
        assert!(fit_nbar_spectra(&red, &empty, &fixed, &FitOptions::default()).is_err());
    }
}
