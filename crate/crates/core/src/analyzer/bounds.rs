//! First times after which the (shifted) semigroup stays above its
//! rank-one lower bound.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SpectralCertificate;
use crate::error::{check_dim, invalid, Error, Result};
use crate::grid::GridSpec;
use crate::lattice::{al_to_gauge_norm, gauge_norm, rank_one_margin, strong_positivity_margin, WeightedLattice};
use crate::spectral::{expm_series, Generator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Uniform,
    Individual { f: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventualPositivityResult {
    pub mode: Mode,
    pub delta: f64,
    /// `s(A)`; every series below refers to `e^{t(A - s(A))}`.
    pub shift: f64,
    pub t0: f64,
    pub epsilon: f64,
    /// Evaluation times: `0` followed by the grid.
    pub grid: Vec<f64>,
    /// Uniform: `min_ij e^{tA}_ij / (u_i phi_j)`. Individual: `min_i (e^{tA} f)_i / u_i`.
    pub margin_series: Vec<f64>,
    /// Uniform only: `B(t) = ||e^{tA}(I - P)||` from `al(psi)` to `gauge(v)`.
    pub b_series: Option<Vec<f64>>,
    /// Uniform only: `min_ij e^{tA}_ij / (v_i psi_j)`.
    pub rank_one_series: Option<Vec<f64>>,
    /// Time after which the exponential tail envelope certifies the bound.
    pub tail_time: f64,
    /// Whether the margin stays `>= epsilon` at every sample from `t0` on.
    pub margin_holds: bool,
    /// Uniform only: whether `B(t) <= delta` implied a rank-one margin of at
    /// least `1 - delta` at every sample.
    pub implication_holds: Option<bool>,
}

const IMPLICATION_SLACK: f64 = 1e-9;

fn prepare(
    g: &Generator,
    cert: &SpectralCertificate,
    l: &WeightedLattice,
    delta: f64,
    grid: &GridSpec,
) -> Result<(Generator, Vec<f64>)> {
    check_dim(g.n(), l.n())?;
    if !cert.passed() {
        return Err(Error::CertificateFailed {
            reasons: cert.verdict.describe(),
        });
    }
    check_dim(g.n(), cert.v.len())?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "delta out of (0,1)"));
    }
    grid.validate()?;
    let mut times = vec![0.0];
    times.extend(grid.times());
    Ok((g.shifted(-cert.spectral_bound), times))
}

/// Exponential envelope through the last quarter of `r`: the time after which
/// `kappa e^{-gap (t - t_end)} <= level`. Returns `-inf` when the residuals vanish.
fn tail_time(times: &[f64], r: &[f64], gap: f64, level: f64) -> f64 {
    let n = times.len();
    let t_end = times[n - 1];
    if !gap.is_finite() {
        return if r.iter().all(|&x| x <= level) { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    let start = n - (n / 4).max(1);
    let kappa = (start..n)
        .map(|k| r[k] * (gap * (times[k] - t_end)).exp())
        .fold(0.0, f64::max);
    if kappa == 0.0 {
        return f64::NEG_INFINITY;
    }
    t_end + (kappa / level).ln() / gap
}

/// Index of the first sample from which `ok` holds to the end of the grid.
fn first_of_final_run(ok: &[bool]) -> Option<usize> {
    if !*ok.last()? {
        return None;
    }
    let last_bad = ok.iter().rposition(|&b| !b);
    Some(last_bad.map_or(0, |k| k + 1))
}

/// Uniform bound: the first grid time `t0` after which `B(t) <= delta`,
/// so that `e^{t(A - s)} >= (1 - delta) c1 d1 u phi^T` for `t >= t0`.
pub fn uniform_t0(
    g: &Generator,
    cert: &SpectralCertificate,
    l: &WeightedLattice,
    delta: f64,
    grid: &GridSpec,
) -> Result<EventualPositivityResult> {
    let (g0, times) = prepare(g, cert, l, delta, grid)?;
    let series = expm_series(&g0, &times)?;
    let v = DVector::from_column_slice(&cert.v);
    let psi = DVector::from_column_slice(&cert.psi);
    let p: DMatrix<f64> = &v * psi.transpose();
    let k = cert.constants.expect("passing certificates carry constants");
    let epsilon = (1.0 - delta) * k.c1 * k.d1;

    let mut b = Vec::with_capacity(times.len());
    let mut margin = Vec::with_capacity(times.len());
    let mut rank_one = Vec::with_capacity(times.len());
    for e in &series.values {
        b.push(al_to_gauge_norm(&(e - &p), &cert.psi, &cert.v));
        margin.push(rank_one_margin(e, l.u(), l.phi()));
        rank_one.push(rank_one_margin(e, &cert.v, &cert.psi));
    }
    let ok: Vec<bool> = b.iter().map(|&x| x <= delta).collect();
    let t_end = *times.last().unwrap();
    let b_end = *b.last().unwrap();
    let Some(k0) = first_of_final_run(&ok) else {
        return Err(Error::GridExhausted {
            t_end,
            value: b_end,
            target: delta,
            extrapolated: t_end + (b_end / delta).ln() / cert.dominance_gap,
        });
    };
    let tail = tail_time(&times, &b, cert.dominance_gap, delta);
    if tail > t_end {
        return Err(Error::GridExhausted {
            t_end,
            value: b_end,
            target: delta,
            extrapolated: tail,
        });
    }
    let implication = b
        .iter()
        .zip(&rank_one)
        .all(|(&bt, &m)| bt > delta || m >= 1.0 - delta - IMPLICATION_SLACK);
    let margin_holds = margin[k0..].iter().all(|&m| m >= epsilon * (1.0 - IMPLICATION_SLACK));
    Ok(EventualPositivityResult {
        mode: Mode::Uniform,
        delta,
        shift: cert.spectral_bound,
        t0: times[k0],
        epsilon,
        grid: times,
        margin_series: margin,
        b_series: Some(b),
        rank_one_series: Some(rank_one),
        tail_time: tail.max(0.0),
        margin_holds,
        implication_holds: Some(implication),
    })
}

/// Individual bound for one initial datum `f >= 0`, `f != 0`: the first grid
/// time after which `e^{t(A - s)} f >= eps_f u` with
/// `eps_f = (1 - delta) c1 <psi, f> / 2`.
pub fn individual_t0(
    g: &Generator,
    cert: &SpectralCertificate,
    f: &[f64],
    l: &WeightedLattice,
    delta: f64,
    grid: &GridSpec,
) -> Result<EventualPositivityResult> {
    check_dim(g.n(), f.len())?;
    if f.iter().any(|&x| !(x >= 0.0)) || f.iter().all(|&x| x == 0.0) {
        return Err(invalid("f", "must be nonnegative and nonzero"));
    }
    let (g0, times) = prepare(g, cert, l, delta, grid)?;
    let series = expm_series(&g0, &times)?;
    let k = cert.constants.expect("passing certificates carry constants");
    let fv = DVector::from_column_slice(f);
    let v = DVector::from_column_slice(&cert.v);
    let mass = DVector::from_column_slice(&cert.psi).dot(&fv);
    let limit = &v * mass;
    let level = 0.5 * (1.0 - delta) * k.c1 * mass;
    // The limit margin is c1 <psi, f>, so a gauge residual below c1 <psi, f> - level suffices.
    let room = k.c1 * mass - level;

    let mut margin = Vec::with_capacity(times.len());
    let mut resid = Vec::with_capacity(times.len());
    for e in &series.values {
        let x = e * &fv;
        margin.push(strong_positivity_margin(x.as_slice(), l.u())?.value);
        resid.push(gauge_norm((&x - &limit).as_slice(), l.u())?);
    }
    let ok: Vec<bool> = margin.iter().map(|&m| m >= level).collect();
    let t_end = *times.last().unwrap();
    let m_end = *margin.last().unwrap();
    let Some(k0) = first_of_final_run(&ok) else {
        return Err(Error::GridExhausted {
            t_end,
            value: m_end,
            target: level,
            extrapolated: f64::INFINITY,
        });
    };
    let tail = tail_time(&times, &resid, cert.dominance_gap, room);
    if tail > t_end {
        return Err(Error::GridExhausted {
            t_end,
            value: *resid.last().unwrap(),
            target: room,
            extrapolated: tail,
        });
    }
    Ok(EventualPositivityResult {
        mode: Mode::Individual { f: f.to_vec() },
        delta,
        shift: cert.spectral_bound,
        t0: times[k0],
        epsilon: level,
        grid: times,
        margin_series: margin,
        b_series: None,
        rank_one_series: None,
        tail_time: tail.max(0.0),
        margin_holds: true,
        implication_holds: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{check_criteria, Tolerances};
    use crate::grid::Spacing;
    use crate::lattice::BaseNorm;

    fn swap() -> (Generator, WeightedLattice, SpectralCertificate) {
        let g = Generator::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), "swap").unwrap();
        let l = WeightedLattice::uniform(2, BaseNorm::L2).unwrap();
        let c = check_criteria(&g, &l, &Tolerances::default()).unwrap();
        (g, l, c)
    }

    #[test]
    fn swap_uniform_bound() {
        // e^{t(A - 1)} = P + e^{-2t} (I - P) and B(t) = e^{-2t}.
        let (g, l, c) = swap();
        let grid = GridSpec::new(1e-3, 10.0, 4000, Spacing::Linear).unwrap();
        let r = uniform_t0(&g, &c, &l, 0.5, &grid).unwrap();
        let exact = 2f64.ln() / 2.0;
        assert!(r.t0 >= exact && r.t0 - exact <= 10.0 / 3999.0 + 1e-12);
        assert!((r.epsilon - 0.25).abs() < 1e-15);
        for (t, b) in r.grid.iter().zip(r.b_series.as_ref().unwrap()) {
            assert!((b - (-2.0 * t).exp()).abs() < 1e-12);
        }
        assert_eq!(r.implication_holds, Some(true));
        assert!(r.margin_holds);
        assert!(r.tail_time <= 10.0);
    }

    #[test]
    fn swap_individual_bound() {
        // (x(t))_1 = (1 - e^{-2t}) / 2 reaches eps_f = 1/8 at t = ln(4/3) / 2.
        let (g, l, c) = swap();
        let grid = GridSpec::new(1e-3, 10.0, 4000, Spacing::Linear).unwrap();
        let r = individual_t0(&g, &c, &[1.0, 0.0], &l, 0.5, &grid).unwrap();
        let exact = (4.0f64 / 3.0).ln() / 2.0;
        assert!(r.t0 >= exact && r.t0 - exact <= 10.0 / 3999.0 + 1e-12, "{}", r.t0);
        assert!((r.epsilon - 0.125).abs() < 1e-15);
    }

    #[test]
    fn dominant_eigenvector_is_positive_from_time_zero() {
        let (g, l, c) = swap();
        let grid = GridSpec::for_gap(c.dominance_gap);
        let r = individual_t0(&g, &c, &c.v.clone(), &l, 0.5, &grid).unwrap();
        assert_eq!(r.t0, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (g, l, c) = swap();
        let grid = GridSpec::for_gap(2.0);
        assert!(uniform_t0(&g, &c, &l, 1.0, &grid).is_err());
        assert!(uniform_t0(&g, &c, &l, 0.0, &grid).is_err());
        assert!(individual_t0(&g, &c, &[0.0, 0.0], &l, 0.5, &grid).is_err());
        assert!(individual_t0(&g, &c, &[1.0, -1.0], &l, 0.5, &grid).is_err());
        let id = Generator::new(DMatrix::identity(2, 2), "id").unwrap();
        let bad = check_criteria(&id, &l, &Tolerances::default()).unwrap();
        assert!(matches!(
            uniform_t0(&id, &bad, &l, 0.5, &grid),
            Err(Error::CertificateFailed { .. })
        ));
    }

    #[test]
    fn short_grid_is_exhausted() {
        let (g, l, c) = swap();
        let grid = GridSpec::new(1e-3, 0.2, 50, Spacing::Linear).unwrap();
        match uniform_t0(&g, &c, &l, 0.5, &grid) {
            Err(Error::GridExhausted { extrapolated, .. }) => {
                assert!((extrapolated - 2f64.ln() / 2.0).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }
}
