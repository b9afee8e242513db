//! Bessel functions `J_n` and `I_n` of integer order and real argument.
//!
//! `J_n` uses Miller's backward recurrence started at order `2(n + ceil(x)) + 20`
//! and normalised with `1 = J_0 + 2 sum_k J_{2k}`. `I_n` uses the ascending
//! series, all of whose terms are positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 64;
pub const MAX_ARG: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselKind {
    J,
    I,
}

pub fn bessel(kind: BesselKind, n: usize, x: f64) -> Result<f64> {
    if n > MAX_ORDER || !(0.0..=MAX_ARG).contains(&x) {
        return Err(Error::BesselEnvelope { order: n, x });
    }
    Ok(match kind {
        BesselKind::J => bessel_j_all(n, x)[n],
        BesselKind::I => bessel_i(n, x),
    })
}

pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    bessel(BesselKind::J, n, x)
}

pub fn bessel_i(n: usize, x: f64) -> f64 {
    // (x/2)^n / n!
    let mut pre = 1.0;
    for k in 1..=n {
        pre *= 0.5 * x / k as f64;
    }
    pre * i_series_scaled(n, x)
}

/// `J_0(x), ..., J_{n_max}(x)` for `x >= 0`. No envelope check.
pub(crate) fn bessel_j_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let j = miller(n_max, x);
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for (o, v) in out.iter_mut().zip(&j) {
        *o = v / norm;
    }
    out
}

/// Unnormalised backward recurrence, proportional to `J_0(x), J_1(x), ...`.
fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let mut start = 2 * (n_max + x.ceil() as usize) + 20;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut j = vec![0.0f64; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        j[k - 1] = k as f64 * two_over_x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    j
}

/// `J_{n+1}(x) / J_n(x)` for `x > 0`: the backward recurrence run on ratios
/// `r_k = J_{k+1} / J_k`, `r_{k-1} = 1 / (2k/x - r_k)`, which cannot overflow.
pub(crate) fn bessel_j_ratio(n: usize, x: f64) -> f64 {
    let start = 2 * (n + 1 + x.ceil() as usize) + 20;
    let mut r = 0.0;
    for k in (n + 1..=start).rev() {
        r = 1.0 / (2.0 * k as f64 / x - r);
    }
    r
}

/// `I_{n+1}(x) / I_n(x)`, free of underflow at small `x`.
pub(crate) fn bessel_i_ratio(n: usize, x: f64) -> f64 {
    0.5 * x / (n + 1) as f64 * i_series_scaled(n + 1, x) / i_series_scaled(n, x)
}

/// `I_n(x) n! / (x/2)^n`.
fn i_series_scaled(n: usize, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    let mut k = 0usize;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term <= 1e-17 * sum {
            return sum;
        }
    }
}

/// `J_n` via its ascending series. Used as an independent check for small `x`.
pub fn bessel_j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(0, 0.0), 1.0);
        for n in 1..10 {
            assert_eq!(bessel_j(n, 0.0).unwrap(), 0.0);
            assert_eq!(bessel_i(n, 0.0), 0.0);
        }
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(bessel_j(0, 2.404825557695773).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn i0_at_two() {
        assert!((bessel_i(0, 2.0) - 2.279585302336067).abs() < 1e-14);
    }

    #[test]
    fn miller_matches_series_for_small_arguments() {
        for n in [0usize, 1, 2, 5, 10, 30, 64] {
            for x in [0.1, 0.5, 1.0, 2.0, 3.0, 5.0] {
                let a = bessel_j(n, x).unwrap();
                let b = bessel_j_series(n, x);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300), "n = {n}, x = {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn large_argument_identities() {
        // Neumann sum and the recurrence J_{n-1} + J_{n+1} = (2n/x) J_n.
        let x = 47.3;
        let j = bessel_j_all(160, x);
        let s: f64 = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-13);
        for n in 1..63 {
            assert!((j[n - 1] + j[n + 1] - 2.0 * n as f64 / x * j[n]).abs() < 1e-13);
        }
        // J_0(50) reference
        assert!((bessel_j(0, 50.0).unwrap() - 0.05581232766925181).abs() < 1e-13);
    }

    #[test]
    fn ratios_match_values() {
        for n in [0usize, 3, 20] {
            for x in [0.3, 2.0, 11.0] {
                let j = bessel_j_all(n + 1, x);
                assert!((bessel_j_ratio(n, x) - j[n + 1] / j[n]).abs() < 1e-12 * (j[n + 1] / j[n]).abs());
                let r = bessel_i(n + 1, x) / bessel_i(n, x);
                assert!((bessel_i_ratio(n, x) - r).abs() < 1e-13 * r);
            }
        }
        // would underflow if formed from the values
        assert!((bessel_i_ratio(64, 1e-8) - 0.5e-8 / 65.0).abs() < 1e-22);
        assert!((bessel_j_ratio(64, 1e-8) - 0.5e-8 / 65.0).abs() < 1e-22);
    }

    #[test]
    fn envelope() {
        assert!(bessel_j(65, 1.0).is_err());
        assert!(bessel(BesselKind::I, 0, 50.1).is_err());
        assert!(bessel(BesselKind::I, 0, -1.0).is_err());
    }
}
