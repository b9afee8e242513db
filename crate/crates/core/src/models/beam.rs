//! Clamped beam `A u = -u''''` on `(0, 1)` with `u = u' = 0` at both ends.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DiscretizedOperator, Metadata};
use crate::error::{invalid, Result};
use crate::lattice::{BaseNorm, WeightedLattice};
use crate::spectral::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    /// Interior points.
    pub m: usize,
}

impl BeamSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 8 {
            return Err(invalid("m", "need at least 8 interior points"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.m + 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.m).map(|i| i as f64 * self.h()).collect()
    }

    /// `dist(x_i, {0, 1})^2`; the smallest value is `h^2`.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.m;
        (1..=m).map(|i| (i.min(m + 1 - i) as f64 * self.h()).powi(2)).collect()
    }
}

/// Stencil `(1, -4, 6, -4, 1) / h^4` on the interior nodes, with the ghost
/// value `u_{-1} = u_1` (and its mirror image) folded into the first and last rows.
pub fn build_clamped_beam(spec: &BeamSpec) -> Result<DiscretizedOperator> {
    spec.validate()?;
    let m = spec.m;
    let h4 = spec.h().powi(4);
    let mut a = DMatrix::zeros(m, m);
    let stencil = [1.0, -4.0, 6.0, -4.0, 1.0];
    for i in 0..m {
        for (k, &w) in stencil.iter().enumerate() {
            let j = i as i64 + k as i64 - 2;
            if (0..m as i64).contains(&j) {
                a[(i, j as usize)] = -w / h4;
            }
        }
    }
    a[(0, 0)] -= 1.0 / h4;
    a[(m - 1, m - 1)] -= 1.0 / h4;
    let w = spec.weights();
    let quad = vec![spec.h(); m];
    let generator = Generator::symmetric(a, format!("clamped_beam(m={m})"))?;
    let lattice = WeightedLattice::new(w.clone(), w, BaseNorm::L2, quad)?;
    Ok(DiscretizedOperator {
        generator,
        lattice,
        metadata: Metadata::Grid { nodes: spec.nodes() },
    })
}

/// First positive root of `cos k cosh k = 1`, by bisection.
pub fn beam_wavenumber() -> f64 {
    let f = |k: f64| k.cos() * k.cosh() - 1.0;
    let (mut lo, mut hi) = (4.0f64, 5.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber() {
        assert!((beam_wavenumber() - 4.730040744862704).abs() < 1e-12);
    }

    #[test]
    fn symmetric_negative_definite() {
        let op = build_clamped_beam(&BeamSpec { m: 40 }).unwrap();
        let ev = op.generator.matrix().clone().symmetric_eigenvalues();
        assert!(ev.iter().all(|&x| x < 0.0));
        let s = ev.max();
        let k = beam_wavenumber();
        assert!((s + k.powi(4)).abs() / k.powi(4) < 0.02);
        assert_eq!(op.lattice.u()[0], BeamSpec { m: 40 }.h().powi(2));
    }
}
