//! Dirichlet-to-Neumann operator `D_lambda` on the unit circle.
//!
//! For `u` solving `Delta u = lambda u` in the disc with boundary values
//! `e^{in theta}`, the outward normal derivative is `d_n(lambda) e^{in theta}`,
//! so `D_lambda` is the Fourier multiplier `d_n`. The generator is `-D_lambda`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::{bessel_i_ratio, bessel_j_ratio, MAX_ARG, MAX_ORDER};
use super::{DiscretizedOperator, Metadata};
use crate::analyzer::{check_criteria, positivity_scan, uniform_t0, Tolerances};
use crate::error::{invalid, Error, Result};
use crate::grid::GridSpec;
use crate::lattice::{BaseNorm, WeightedLattice};
use crate::spectral::Generator;

/// Symbols above `1e9 (1 + |n| + mu)` are treated as a pole (Bessel zero).
const SINGULAR_SCALE: f64 = 1e9;

/// `d_n(lambda)`: `|n|` at `lambda = 0`, `mu I_n'(mu) / I_n(mu)` with
/// `mu = sqrt(lambda)` for `lambda > 0`, and `mu J_n'(mu) / J_n(mu)` with
/// `mu = sqrt(-lambda)` for `lambda < 0`.
pub fn dtn_symbol(n: i64, lambda: f64) -> Result<f64> {
    let m = n.unsigned_abs() as usize;
    let mu = lambda.abs().sqrt();
    if m > MAX_ORDER || mu > MAX_ARG || !lambda.is_finite() {
        return Err(Error::BesselEnvelope { order: m, x: mu });
    }
    if lambda == 0.0 {
        return Ok(m as f64);
    }
    // x C_n'(x) = n C_n(x) -+ x C_{n+1}(x) for C = J, I.
    let d = if lambda > 0.0 {
        m as f64 + mu * bessel_i_ratio(m, mu)
    } else {
        m as f64 - mu * bessel_j_ratio(m, mu)
    };
    if !d.is_finite() || d.abs() > SINGULAR_SCALE * (1.0 + m as f64 + mu) {
        return Err(Error::SingularSymbol { mode: m, lambda });
    }
    Ok(d)
}

/// Discretisation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtnSpec {
    pub lambda: f64,
    /// Mode cutoff `N`.
    #[serde(rename = "N")]
    pub n_modes: usize,
    /// Number of grid points `M` on the circle.
    #[serde(rename = "M")]
    pub grid: usize,
}

impl DtnSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 4 {
            return Err(invalid("M", "need at least 4 grid points"));
        }
        if self.n_modes < self.grid / 2 {
            return Err(invalid(
                "N",
                format!(
                    "mode cutoff {} does not resolve a {}-point grid (need N >= {})",
                    self.n_modes,
                    self.grid,
                    self.grid / 2
                ),
            ));
        }
        Ok(())
    }

    /// Modes representable on the grid: `-(M-1)/2..=(M-1)/2` for odd `M`,
    /// `-M/2+1..=M/2` for even `M`.
    pub fn grid_modes(&self) -> std::ops::RangeInclusive<i64> {
        let m = self.grid as i64;
        if m % 2 == 1 {
            -(m - 1) / 2..=(m - 1) / 2
        } else {
            -m / 2 + 1..=m / 2
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.grid).map(|j| 2.0 * PI * j as f64 / self.grid as f64).collect()
    }
}

/// `d_0, ..., d_n_max`.
pub fn symbol_list(lambda: f64, n_max: usize) -> Result<Vec<f64>> {
    (0..=n_max as i64).map(|n| dtn_symbol(n, lambda)).collect()
}

/// Real symmetric circulant for `-D_lambda` on the uniform `M`-point grid,
/// every grid mode carrying its own symbol:
/// `A_jk = (1/M) sum_n -d_n cos(n (theta_j - theta_k))`.
/// Lattice weights are `u = phi = 1` with quadrature `2 pi / M`.
pub fn build_dtn(spec: &DtnSpec) -> Result<DiscretizedOperator> {
    spec.validate()?;
    let m = spec.grid;
    let n_max = spec.grid_modes().map(|n| n.unsigned_abs() as usize).max().unwrap();
    let d = symbol_list(spec.lambda, n_max)?;
    let col: Vec<f64> = (0..m)
        .map(|r| {
            let x = 2.0 * PI * r as f64 / m as f64;
            spec.grid_modes()
                .map(|n| -d[n.unsigned_abs() as usize] * (n as f64 * x).cos())
                .sum::<f64>()
                / m as f64
        })
        .collect();
    let a = DMatrix::from_fn(m, m, |j, k| col[(j + m - k) % m]);
    // Exact symmetry: use the smaller of the two offsets.
    let a = DMatrix::from_fn(m, m, |j, k| a[(j.min(k), j.max(k))]);
    let quad = vec![2.0 * PI / m as f64; m];
    let generator = Generator::quad_symmetric(a, &quad, format!("dtn(lambda={})", spec.lambda))?;
    let lattice = WeightedLattice::new(vec![1.0; m], vec![1.0; m], BaseNorm::L2, quad)?;
    Ok(DiscretizedOperator {
        generator,
        lattice,
        metadata: Metadata::Dtn {
            symbols: d,
            thetas: spec.thetas(),
        },
    })
}

/// `k_t(theta) = (1/2pi) sum_{|n| <= N} e^{-t d_n} e^{in theta}`, evaluated as
/// a cosine series. For `M = 2N + 1` the semigroup matrix is `(2pi/M) k_t(theta_j - theta_k)`.
pub fn dtn_kernel(lambda: f64, n_modes: usize, t: f64, thetas: &[f64]) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(invalid("t", "kernel needs t > 0"));
    }
    let d = symbol_list(lambda, n_modes)?;
    let w: Vec<f64> = d.iter().map(|dn| (-t * dn).exp()).collect();
    Ok(thetas
        .iter()
        .map(|&th| {
            let tail: f64 = (1..=n_modes).map(|n| w[n] * (n as f64 * th).cos()).sum();
            (w[0] + 2.0 * tail) / (2.0 * PI)
        })
        .collect())
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub passed: bool,
    pub gap: Option<f64>,
    pub t0: Option<f64>,
    pub epsilon: Option<f64>,
    /// Smallest entry of the shifted semigroup over the scan grid.
    pub min_entry: f64,
    pub first_nonneg_time: Option<f64>,
    /// Set when the point could not be analysed (singular symbol, exhausted grid, ...).
    pub error: Option<String>,
}

/// Certificate, uniform bound and positivity scan for each `lambda`, in parallel.
pub fn dtn_sweep(
    lambdas: &[f64],
    n_modes: usize,
    grid_points: usize,
    delta: f64,
    scan_grid: &GridSpec,
    tol: &Tolerances,
) -> Vec<SweepRow> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let mut row = SweepRow {
                lambda,
                passed: false,
                gap: None,
                t0: None,
                epsilon: None,
                min_entry: f64::NAN,
                first_nonneg_time: None,
                error: None,
            };
            let spec = DtnSpec {
                lambda,
                n_modes,
                grid: grid_points,
            };
            let run = |row: &mut SweepRow| -> Result<()> {
                let op = build_dtn(&spec)?;
                let scan = positivity_scan(&op.generator, scan_grid, 0.0)?;
                row.min_entry = scan.global_min();
                row.first_nonneg_time = scan.first_nonneg_time;
                let cert = check_criteria(&op.generator, &op.lattice, tol)?;
                row.passed = cert.passed();
                row.gap = Some(cert.dominance_gap).filter(|g| g.is_finite());
                if cert.passed() {
                    let r = uniform_t0(
                        &op.generator,
                        &cert,
                        &op.lattice,
                        delta,
                        &GridSpec::for_gap(cert.dominance_gap),
                    )?;
                    row.t0 = Some(r.t0);
                    row.epsilon = Some(r.epsilon);
                }
                Ok(())
            };
            if let Err(e) = run(&mut row) {
                row.error = Some(e.to_string());
            }
            row
        })
        .collect()
}
