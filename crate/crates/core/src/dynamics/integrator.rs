use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dormand–Prince 5(4) with error control.
    Adaptive,
    /// Classical RK4 with step `max_step` (reproducibility runs).
    FixedRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Largest step, s.
    pub max_step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Adaptive,
            max_step: 1e-4,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        Self {
            method: Method::FixedRk4,
            max_step: step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("max_step", self.max_step),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::param("max_steps", "must be > 0"));
        }
        Ok(())
    }
}

/// First-order complex ODE `y' = f(t, y)`.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);

    /// Deviation of the conserved quantity (trace or norm) from its ideal
    /// value; reported in failure diagnostics.
    fn drift(&self, _y: &[C64]) -> f64 {
        0.0
    }
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Work {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    next: Vec<C64>,
}

impl Work {
    fn new(n: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); n];
        Self {
            k: [z(), z(), z(), z(), z(), z(), z()],
            tmp: z(),
            next: z(),
        }
    }
}

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

fn rhs_into<S: OdeSystem + ?Sized>(sys: &S, t: f64, y: &[C64], dy: &mut [C64]) {
    dy.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
    sys.rhs(t, y, dy);
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    (v.map(|x| x * x).sum::<f64>() / n.max(1) as f64).sqrt()
}

/// Integrate from `t = 0` (with `y(0) = y0`) and return the state at each
/// entry of `times`, which must be non-negative and strictly increasing.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[C64],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Vec<C64>>> {
    cfg.validate()?;
    check_times(times)?;
    if y0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: y0.len(),
        });
    }
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut work = Work::new(y.len());
    let mut h = f64::NAN;
    let mut steps = 0usize;
    for &target in times {
        if target > t {
            match cfg.method {
                Method::FixedRk4 => rk4_segment(sys, &mut y, t, target, cfg.max_step, &mut work),
                Method::Adaptive => {
                    if h.is_nan() {
                        h = initial_step(sys, &y, target - t, cfg, &mut work);
                    }
                    dopri_segment(sys, &mut y, t, target, &mut h, cfg, &mut steps, &mut work)?;
                }
            }
            t = target;
        }
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integration {
                t,
                reason: "state became non-finite".into(),
                trace_drift: f64::NAN,
            });
        }
        out.push(y.clone());
    }
    Ok(out)
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::param("times", "need at least one output time"));
    }
    if !(times[0] >= 0.0) {
        return Err(Error::param("times", "must start at or after t = 0"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("times", "must be strictly increasing"));
    }
    Ok(())
}

fn rk4_segment<S: OdeSystem + ?Sized>(sys: &S, y: &mut Vec<C64>, t0: f64, t1: f64, max_step: f64, w: &mut Work) {
    let n_steps = ((t1 - t0) / max_step).ceil().max(1.0) as usize;
    let h = (t1 - t0) / n_steps as f64;
    for s in 0..n_steps {
        let t = t0 + s as f64 * h;
        let [k1, k2, k3, k4, ..] = &mut w.k;
        rhs_into(sys, t, y, k1);
        combine(&mut w.tmp, y, h / 2.0, &[(1.0, k1)]);
        rhs_into(sys, t + h / 2.0, &w.tmp, k2);
        combine(&mut w.tmp, y, h / 2.0, &[(1.0, k2)]);
        rhs_into(sys, t + h / 2.0, &w.tmp, k3);
        combine(&mut w.tmp, y, h, &[(1.0, k3)]);
        rhs_into(sys, t + h, &w.tmp, k4);
        combine(&mut w.next, y, h / 6.0, &[(1.0, k1), (2.0, k2), (2.0, k3), (1.0, k4)]);
        std::mem::swap(y, &mut w.next);
    }
}

fn initial_step<S: OdeSystem + ?Sized>(sys: &S, y: &[C64], span: f64, cfg: &IntegratorConfig, w: &mut Work) -> f64 {
    rhs_into(sys, 0.0, y, &mut w.k[0]);
    let n = y.len();
    let sc = |z: &C64| cfg.abs_tol + cfg.rel_tol * z.norm();
    let d0 = rms(y.iter().map(|z| z.norm() / sc(z)), n);
    let d1 = rms(y.iter().zip(&w.k[0]).map(|(z, k)| k.norm() / sc(z)), n);
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h.min(cfg.max_step).min(span)
}

#[allow(clippy::too_many_arguments)]
fn dopri_segment<S: OdeSystem + ?Sized>(
    sys: &S,
    y: &mut Vec<C64>,
    t0: f64,
    t1: f64,
    h: &mut f64,
    cfg: &IntegratorConfig,
    steps: &mut usize,
    w: &mut Work,
) -> Result<()> {
    let n = y.len();
    let mut t = t0;
    while t < t1 {
        if *steps >= cfg.max_steps {
            return Err(Error::Integration {
                t,
                reason: format!("exceeded {} steps", cfg.max_steps),
                trace_drift: sys.drift(y),
            });
        }
        let last = t + 1.01 * *h >= t1;
        let step = if last { t1 - t } else { *h };
        if step <= 1e-15 * t1.abs().max(1e-30) {
            return Err(Error::Integration {
                t,
                reason: format!("step size underflow ({step:.3e} s)"),
                trace_drift: sys.drift(y),
            });
        }
        let [k1, k2, k3, k4, k5, k6, k7] = &mut w.k;
        rhs_into(sys, t, y, k1);
        combine(&mut w.tmp, y, step, &[(A21, k1)]);
        rhs_into(sys, t + C2 * step, &w.tmp, k2);
        combine(&mut w.tmp, y, step, &[(A31, k1), (A32, k2)]);
        rhs_into(sys, t + C3 * step, &w.tmp, k3);
        combine(&mut w.tmp, y, step, &[(A41, k1), (A42, k2), (A43, k3)]);
        rhs_into(sys, t + C4 * step, &w.tmp, k4);
        combine(&mut w.tmp, y, step, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        rhs_into(sys, t + C5 * step, &w.tmp, k5);
        combine(&mut w.tmp, y, step, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
        rhs_into(sys, t + step, &w.tmp, k6);
        combine(&mut w.next, y, step, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        rhs_into(sys, t + step, &w.next, k7);

        let err = rms(
            (0..n).map(|i| {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
                let scale = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(w.next[i].norm());
                e.norm() / scale
            }),
            n,
        );
        *steps += 1;
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if last { t1 } else { t + step };
            std::mem::swap(y, &mut w.next);
            if !last {
                *h = (step * factor).min(cfg.max_step);
            }
        } else {
            *h = (step * factor.min(1.0)).min(cfg.max_step);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// y' = i ω y, exact y = e^{iωt}.
    struct Rotor(f64);

    impl OdeSystem for Rotor {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = C64::new(0.0, self.0) * y[0];
        }
    }

    #[test]
    fn adaptive_tracks_rotation() {
        let sys = Rotor(2.0 * std::f64::consts::PI * 1e3);
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 1e-4).collect();
        let out = integrate(&sys, &[C64::new(1.0, 0.0)], &times, &IntegratorConfig::default()).unwrap();
        for (t, y) in times.iter().zip(&out) {
            let want = C64::from_polar(1.0, sys.0 * t);
            assert!((y[0] - want).norm() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn rk4_fourth_order() {
        let sys = Rotor(1.0);
        let err = |h: f64| {
            let out = integrate(&sys, &[C64::new(1.0, 0.0)], &[1.0], &IntegratorConfig::rk4(h)).unwrap();
            (out[0][0] - C64::from_polar(1.0, 1.0)).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert_relative_eq!(ratio, 16.0, max_relative = 0.1);
    }

    #[test]
    fn rejects_bad_times() {
        let sys = Rotor(1.0);
        let y0 = [C64::new(1.0, 0.0)];
        let cfg = IntegratorConfig::default();
        assert!(integrate(&sys, &y0, &[], &cfg).is_err());
        assert!(integrate(&sys, &y0, &[0.2, 0.1], &cfg).is_err());
        assert!(integrate(&sys, &y0, &[-1.0], &cfg).is_err());
    }

    #[test]
    fn step_budget_reported() {
        let sys = Rotor(1e6);
        let cfg = IntegratorConfig {
            max_steps: 10,
            ..IntegratorConfig::default()
        };
        let err = integrate(&sys, &[C64::new(1.0, 0.0)], &[1.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }
}
