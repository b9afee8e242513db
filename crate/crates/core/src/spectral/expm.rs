//! Matrix exponential by scaling and squaring with diagonal Pade approximants
//! (degrees 3, 5, 7, 9, 13; degree and scaling picked from the 1-norm).

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::Generator;
use crate::error::{Error, Result};

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(A)` for a general square matrix.
pub fn expm_matrix(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let nrm = norm1(a);
    if nrm == 0.0 {
        return Ok(ident);
    }
    if !nrm.is_finite() {
        return Err(Error::ExpmOverflow { t: 1.0, norm: nrm });
    }

    for &(m, theta) in &THETA[..4] {
        if nrm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return finish(pade_low(a, b), 0, nrm);
        }
    }

    let theta13 = THETA[4].1;
    let s = (nrm / theta13).log2().ceil().max(0.0) as i32;
    let scaled = a / 2f64.powi(s);
    finish(pade13(&scaled), s, nrm)
}

/// Returns `(U, V)` for Pade degree `2k+1` with coefficients `b`.
fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut u_inner = DMatrix::<f64>::zeros(n, n);
    let mut v = DMatrix::<f64>::zeros(n, n);
    for k in 0..b.len() / 2 {
        if k > 0 {
            power = &power * &a2;
        }
        v += &power * b[2 * k];
        u_inner += &power * b[2 * k + 1];
    }
    (a * u_inner, v)
}

fn pade13(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let b = &B13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_inner = &a6 * u_hi + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = a * u_inner;
    let v_hi = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_hi + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    (u, v)
}

fn finish((u, v): (DMatrix<f64>, DMatrix<f64>), squarings: i32, nrm: f64) -> Result<DMatrix<f64>> {
    let q = &v - &u;
    let p = &v + &u;
    let lu = q.lu();
    let mut r = lu.solve(&p).ok_or(Error::ExpmOverflow { t: 1.0, norm: nrm })?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().all(|x| x.is_finite()) {
        Ok(r)
    } else {
        Err(Error::ExpmOverflow { t: 1.0, norm: nrm })
    }
}

/// `e^{tA}`. Negative `t` is accepted.
pub fn expm(g: &Generator, t: f64) -> Result<DMatrix<f64>> {
    let ta = g.matrix() * t;
    expm_matrix(&ta).map_err(|e| match e {
        Error::ExpmOverflow { norm, .. } => Error::ExpmOverflow { t, norm },
        other => other,
    })
}

/// Semigroup values on an increasing list of times, built as products
/// `e^{t_k A} = e^{t_{k-1} A} e^{(t_k - t_{k-1}) A}` so that repeated
/// step sizes (linear grids) cost one multiplication per sample.
#[derive(Debug, Clone)]
pub struct ExpmSeries {
    pub times: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
}

/// Relative tolerance under which two consecutive step lengths share one step matrix.
const STEP_REUSE_TOL: f64 = 1e-12;

pub fn expm_series(g: &Generator, times: &[f64]) -> Result<ExpmSeries> {
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(crate::error::invalid("times", "must be nondecreasing"));
    }
    if times.is_empty() {
        return Ok(ExpmSeries {
            times: vec![],
            values: vec![],
        });
    }
    // Distinct step lengths, in order of first appearance.
    let mut steps: Vec<f64> = vec![times[0]];
    let mut step_of = vec![0usize];
    for w in times.windows(2) {
        let d = w[1] - w[0];
        let last = *steps.last().unwrap();
        if (d - last).abs() <= STEP_REUSE_TOL * last.abs().max(d.abs()) {
            step_of.push(steps.len() - 1);
        } else {
            steps.push(d);
            step_of.push(steps.len() - 1);
        }
    }
    let step_mats: Vec<DMatrix<f64>> = steps.par_iter().map(|&d| expm(g, d)).collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(times.len());
    values.push(step_mats[step_of[0]].clone());
    for k in 1..times.len() {
        let next = &values[k - 1] * &step_mats[step_of[k]];
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::ExpmOverflow {
                t: times[k],
                norm: norm1(g.matrix()) * times[k],
            });
        }
        values.push(next);
    }
    Ok(ExpmSeries {
        times: times.to_vec(),
        values,
    })
}
