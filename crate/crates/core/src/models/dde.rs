//! Direct time stepping of the delay equation, independent of the semigroup
//! discretisation.
//!
//! With `z0(t) = int_{t-1}^{t} y` and `z1(t) = int_{t-2}^{t-1} y` the equation
//! becomes the system
//! `y' = c (z1 - z0 + y(t-2) - y(t))`, `z0' = y(t) - y(t-1)`, `z1' = y(t-1) - y(t-2)`
//! in which the delayed values are looked up in the stored solution. Steps
//! are classical RK4; delayed values at half steps are linearly interpolated.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    /// `y(k dt)` for `k = 0..`.
    pub y: Vec<f64>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        (0..self.y.len()).map(|k| k as f64 * self.dt).collect()
    }

    /// Linear interpolation inside the computed range.
    pub fn at(&self, t: f64) -> f64 {
        let x = (t / self.dt).clamp(0.0, (self.y.len() - 1) as f64);
        let k = (x.floor() as usize).min(self.y.len() - 2);
        let w = x - k as f64;
        (1.0 - w) * self.y[k] + w * self.y[k + 1]
    }
}

/// Integrates on `[0, t_end]` from a history given by samples on a uniform
/// grid of `[-2, 0]` (first sample at `-2`, last at `0`), read as a piecewise
/// linear function. `1/dt` must be an integer.
pub fn simulate_dde(c: f64, history: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    if history.len() < 2 || history.iter().any(|x| !x.is_finite()) {
        return Err(invalid("history", "need at least two finite samples"));
    }
    if !(t_end > 0.0 && t_end <= 100.0) {
        return Err(invalid("T", "must lie in (0, 100]"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let per_unit = (1.0 / dt).round();
    if per_unit < 1.0 || (per_unit * dt - 1.0).abs() > 1e-9 {
        return Err(invalid("dt", "step must divide the delay intervals"));
    }
    let p = per_unit as usize;
    let dt = 1.0 / per_unit;

    // Past values on the dt lattice: index 0 is t = -2, index 2p is t = 0.
    let hist_h = 2.0 / (history.len() - 1) as f64;
    let hist = |s: f64| -> f64 {
        let x = ((s + 2.0) / hist_h).clamp(0.0, (history.len() - 1) as f64);
        let k = (x.floor() as usize).min(history.len() - 2);
        let w = x - k as f64;
        (1.0 - w) * history[k] + w * history[k + 1]
    };
    let steps = (t_end / dt).ceil() as usize;
    let mut y: Vec<f64> = (0..=2 * p).map(|k| hist(-2.0 + k as f64 * dt)).collect();
    y.reserve(steps);

    // Trapezoid memory integrals on the dt lattice; exact for piecewise
    // linear histories whose nodes lie on the lattice.
    let trap = |v: &[f64]| -> f64 { dt * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1])) };
    let mut z0 = trap(&y[p..=2 * p]);
    let mut z1 = trap(&y[0..=p]);

    // Delayed value at lattice offset `i` (index of t) plus a half step when `half`.
    let delayed = |y: &[f64], i: usize, half: bool| -> f64 {
        if half {
            0.5 * (y[i] + y[i + 1])
        } else {
            y[i]
        }
    };

    for _ in 0..steps {
        let n = y.len() - 1; // index of current time
        let (d1_0, d1_h, d1_1) = (delayed(&y, n - p, false), delayed(&y, n - p, true), y[n - p + 1]);
        let (d2_0, d2_h, d2_1) = (delayed(&y, n - 2 * p, false), delayed(&y, n - 2 * p, true), y[n - 2 * p + 1]);
        let rhs = |yy: f64, a0: f64, a1: f64, y1: f64, y2: f64| -> (f64, f64, f64) {
            (c * (a1 - a0 + y2 - yy), yy - y1, y1 - y2)
        };
        let yn = y[n];
        let k1 = rhs(yn, z0, z1, d1_0, d2_0);
        let k2 = rhs(
            yn + 0.5 * dt * k1.0,
            z0 + 0.5 * dt * k1.1,
            z1 + 0.5 * dt * k1.2,
            d1_h,
            d2_h,
        );
        let k3 = rhs(
            yn + 0.5 * dt * k2.0,
            z0 + 0.5 * dt * k2.1,
            z1 + 0.5 * dt * k2.2,
            d1_h,
            d2_h,
        );
        let k4 = rhs(yn + dt * k3.0, z0 + dt * k3.1, z1 + dt * k3.2, d1_1, d2_1);
        let w = dt / 6.0;
        y.push(yn + w * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0));
        z0 += w * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        z1 += w * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
    }
    Ok(Trajectory {
        dt,
        y: y.split_off(2 * p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_history_stays_constant() {
        let t = simulate_dde(0.7, &[1.0; 11], 10.0, 0.01).unwrap();
        assert!(t.y.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert_eq!(t.y.len(), 1001);
    }

    #[test]
    fn zero_coefficient_freezes_the_present() {
        let hist: Vec<f64> = (0..=20).map(|k| (k as f64 * 0.3).sin()).collect();
        let t = simulate_dde(0.0, &hist, 3.0, 0.05).unwrap();
        assert!(t.y.iter().all(|&v| (v - hist[20]).abs() < 1e-14));
    }

    #[test]
    fn oscillating_mode() {
        // Re e^{lambda t} solves the equation for a characteristic root lambda.
        use super::super::delay::{delay_dominance_scan, Window};
        let c = 2.0;
        let scan = delay_dominance_scan(c, Window::default_for_delay()).unwrap();
        let lam = *scan.roots.iter().find(|z| z.im > 1.0).unwrap();
        let mode = |t: f64| (lam * t).exp().re;
        let hist: Vec<f64> = (0..=2000).map(|k| mode(-2.0 + k as f64 * 1e-3)).collect();
        let t = simulate_dde(c, &hist, 2.0, 1e-3).unwrap();
        for (k, v) in t.y.iter().enumerate().step_by(100) {
            let s = k as f64 * 1e-3;
            assert!((v - mode(s)).abs() < 1e-4, "t = {s}: {v} vs {}", mode(s));
        }
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(simulate_dde(1.0, &[1.0; 5], 1.0, 0.3).is_err());
        assert!(simulate_dde(1.0, &[1.0; 5], 200.0, 0.1).is_err());
    }
}
