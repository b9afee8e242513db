//! Direct sampling of semigroup and resolvent entries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectralCertificate;
use crate::error::{check_dim, invalid, Result};
use crate::grid::GridSpec;
use crate::lattice::{rank_one_margin, WeightedLattice};
use crate::spectral::{eigenvalues, expm_series, resolvent, Generator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityScan {
    /// `s(A)`; entries are those of `e^{t(A - s(A))}`.
    pub shift: f64,
    pub times: Vec<f64>,
    pub min_entry: Vec<f64>,
    /// First sample from which every later minimum entry is `>= -tol`.
    pub first_nonneg_time: Option<f64>,
}

impl PositivityScan {
    pub fn global_min(&self) -> f64 {
        self.min_entry.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest entry over samples with `t <= t_max`.
    pub fn min_up_to(&self, t_max: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.min_entry)
            .filter(|(t, _)| **t <= t_max)
            .map(|(_, m)| *m)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Minimal entry of `e^{t(A - s(A))}` on the grid. Needs no certificate.
pub fn positivity_scan(g: &Generator, grid: &GridSpec, tol: f64) -> Result<PositivityScan> {
    grid.validate()?;
    let s = eigenvalues(g)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let times = grid.times();
    let series = expm_series(&g.shifted(-s), &times)?;
    let min_entry: Vec<f64> = series.values.iter().map(|e| e.min()).collect();
    let first_nonneg_time = if *min_entry.last().unwrap() >= -tol {
        let k = min_entry.iter().rposition(|&m| m < -tol).map_or(0, |k| k + 1);
        Some(times[k])
    } else {
        None
    };
    Ok(PositivityScan {
        shift: s,
        times,
        min_entry,
        first_nonneg_time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventMargin {
    pub lambda: f64,
    /// `min_ij R(lambda)_ij / (u_i phi_j)`.
    pub margin: f64,
    /// Rank-one leading term `c1 d1 / (lambda - s)`, when the certificate passed.
    pub rank_one_prediction: Option<f64>,
}

/// Resolvent margins `R(lambda) >= eps u phi^T` for real `lambda > s(A)`.
pub fn resolvent_positivity_check(
    g: &Generator,
    cert: &SpectralCertificate,
    l: &WeightedLattice,
    lambdas: &[f64],
) -> Result<Vec<ResolventMargin>> {
    check_dim(g.n(), l.n())?;
    let s = cert.spectral_bound;
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > s) {
                return Err(invalid(
                    "lambda",
                    format!("{lambda} is not above the spectral bound {s}"),
                ));
            }
            let r = resolvent(g, Complex64::new(lambda, 0.0))?.real();
            let prediction = if cert.passed() {
                cert.c1d1().map(|k| k / (lambda - s))
            } else {
                None
            };
            Ok(ResolventMargin {
                lambda,
                margin: rank_one_margin(&r, l.u(), l.phi()),
                rank_one_prediction: prediction,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{check_criteria, Tolerances};
    use crate::grid::Spacing;
    use crate::lattice::BaseNorm;
    use nalgebra::DMatrix;

    #[test]
    fn swap_scan_is_nonnegative() {
        let g = Generator::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), "swap").unwrap();
        let scan = positivity_scan(&g, &GridSpec::new(1e-3, 5.0, 50, Spacing::Linear).unwrap(), 0.0).unwrap();
        assert_eq!(scan.first_nonneg_time, Some(1e-3));
        assert!((scan.shift - 1.0).abs() < 1e-14);
        // (1 - e^{-2t}) / 2
        for (t, m) in scan.times.iter().zip(&scan.min_entry) {
            assert!((m - (1.0 - (-2.0 * t).exp()) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn resolvent_examples() {
        let l = WeightedLattice::uniform(2, BaseNorm::L2).unwrap();
        let swap = Generator::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), "swap").unwrap();
        let c = check_criteria(&swap, &l, &Tolerances::default()).unwrap();
        let r = resolvent_positivity_check(&swap, &c, &l, &[2.0]).unwrap();
        assert!((r[0].margin - 1.0 / 3.0).abs() < 1e-15);
        assert!((r[0].rank_one_prediction.unwrap() - 0.5).abs() < 1e-14);
        assert!(resolvent_positivity_check(&swap, &c, &l, &[0.5]).is_err());

        let d = Generator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), "d").unwrap();
        let c = check_criteria(&d, &l, &Tolerances::default()).unwrap();
        assert!(!c.passed());
        let r = resolvent_positivity_check(&d, &c, &l, &[2.0]).unwrap();
        assert_eq!(r[0].margin, 0.0);
        assert_eq!(r[0].rank_one_prediction, None);
    }
}
