//! Sampling grids over time.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Geometric,
    Linear,
    /// Half the samples geometric on `[t_min, t_switch]`, the rest linear up to `t_max`.
    GeometricThenLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub spacing: Spacing,
}

pub const DEFAULT_T_MIN: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 400;

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, samples: usize, spacing: Spacing) -> Result<Self> {
        let g = Self {
            t_min,
            t_max,
            samples,
            spacing,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return Err(invalid("t_min", "must be positive"));
        }
        if !(self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(invalid("t_max", "must exceed t_min"));
        }
        if self.samples < 2 {
            return Err(invalid("samples", "need at least 2 samples"));
        }
        Ok(())
    }

    /// Default analyzer grid for a semigroup whose non-dominant part decays
    /// like `e^{-gap t}`: `[1e-3, max(10, 20 / gap)]`, 400 samples.
    pub fn for_gap(gap: f64) -> Self {
        let t_max = if gap > 0.0 && gap.is_finite() { (20.0 / gap).max(10.0) } else { 10.0 };
        Self {
            t_min: DEFAULT_T_MIN,
            t_max,
            samples: DEFAULT_SAMPLES,
            spacing: Spacing::GeometricThenLinear,
        }
    }

    /// Sample times, strictly increasing, first `t_min`, last `t_max`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples;
        match self.spacing {
            Spacing::Linear => linear(self.t_min, self.t_max, n),
            Spacing::Geometric => geometric(self.t_min, self.t_max, n),
            Spacing::GeometricThenLinear => {
                let t_switch = (self.t_max / 4.0).min(1.0);
                if t_switch <= self.t_min || n < 4 {
                    return linear(self.t_min, self.t_max, n);
                }
                let n_geo = n / 2;
                let mut out = geometric(self.t_min, t_switch, n_geo);
                let lin = linear(t_switch, self.t_max, n - n_geo + 1);
                out.extend_from_slice(&lin[1..]);
                out
            }
        }
    }
}

fn linear(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { b } else { a + h * k as f64 }).collect()
}

fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { b } else { a * (r * k as f64).exp() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_increasing_with_exact_ends() {
        for spacing in [Spacing::Linear, Spacing::Geometric, Spacing::GeometricThenLinear] {
            let g = GridSpec::new(1e-3, 12.0, 37, spacing).unwrap();
            let t = g.times();
            assert_eq!(t.len(), 37);
            assert_eq!(t[0], 1e-3);
            assert_eq!(*t.last().unwrap(), 12.0);
            assert!(t.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn default_grid_covers_twenty_decay_times() {
        assert_eq!(GridSpec::for_gap(0.5).t_max, 40.0);
        assert_eq!(GridSpec::for_gap(5.0).t_max, 10.0);
        assert_eq!(GridSpec::for_gap(0.5).samples, 400);
    }

    #[test]
    fn validation() {
        assert!(GridSpec::new(0.0, 1.0, 10, Spacing::Linear).is_err());
        assert!(GridSpec::new(1.0, 1.0, 10, Spacing::Linear).is_err());
        assert!(GridSpec::new(0.1, 1.0, 1, Spacing::Linear).is_err());
    }
}
