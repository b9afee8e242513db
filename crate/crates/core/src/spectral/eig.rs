use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use super::Generator;
use crate::error::{Error, Result};

/// Full spectrum of a real generator with right and left eigenvectors.
///
/// Left vectors follow the transposed convention `A^T y = lambda y`, so the
/// pairing `<y, x> = sum_i y_i x_i` is bilinear (no conjugation) and the
/// spectral projection of a simple eigenvalue is `x y^T / <y, x>`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<Complex64>,
    pub right_vectors: Vec<DVector<Complex64>>,
    pub left_vectors: Vec<DVector<Complex64>>,
    /// `||A x - lambda x||_2 / (||A||_2 ||x||_2)` per eigenpair.
    pub residuals: Vec<f64>,
    /// Same for `A^T y - lambda y`.
    pub left_residuals: Vec<f64>,
    norm2: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    /// Spectral abscissa `max Re lambda`.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `|<y, x>| / (|y| |x|)`; close to zero for defective eigenvalues.
    pub fn overlap(&self, k: usize) -> f64 {
        let x = &self.right_vectors[k];
        let y = &self.left_vectors[k];
        let ip: Complex64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        ip.norm() / (x.norm() * y.norm())
    }

    /// Real right and left vectors of a real eigenvalue, each rotated so the
    /// largest component is real and then truncated to the real part.
    pub fn real_pair(&self, k: usize) -> (DVector<f64>, DVector<f64>) {
        (realify(&self.right_vectors[k]), realify(&self.left_vectors[k]))
    }
}

pub(crate) fn realify(x: &DVector<Complex64>) -> DVector<f64> {
    let pivot = x
        .iter()
        .cloned()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    if pivot.norm() == 0.0 {
        return x.map(|z| z.re);
    }
    let phase = pivot.conj() / pivot.norm();
    x.map(|z| (z * phase).re)
}

fn complex_schur(a: &DMatrix<f64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    let max_iter = 200 * n.max(10);
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let schur = Schur::try_new(ac, f64::EPSILON, max_iter).ok_or(Error::EigenConvergence { n, iterations: max_iter })?;
    let (q, mut t) = schur.unpack();
    // The iteration can leave a 2x2 block undeflated; split it explicitly.
    let mut k = 0;
    while k + 1 < n {
        if t[(k + 1, k)].norm() > 0.0 {
            let scale = t[(k, k)].norm() + t[(k + 1, k + 1)].norm();
            if t[(k + 1, k)].norm() <= f64::EPSILON * scale {
                t[(k + 1, k)] = Complex64::new(0.0, 0.0);
            } else {
                return Err(Error::EigenConvergence { n, iterations: max_iter });
            }
        }
        k += 1;
    }
    Ok((q, t))
}

/// Eigenvalues only (cheaper than [`eig`]).
pub fn eigenvalues(g: &Generator) -> Result<Vec<Complex64>> {
    let (_, t) = complex_schur(g.matrix())?;
    let mut vals: Vec<Complex64> = (0..g.n()).map(|k| t[(k, k)]).collect();
    pair_conjugates(&mut vals, None, None, pairing_tol(g.matrix()));
    Ok(vals)
}

fn pairing_tol(a: &DMatrix<f64>) -> f64 {
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    1e-13 * scale * (a.nrows() as f64)
}

/// Eigendecomposition by a complex Schur form `A = Q T Q^H`; eigenvectors of
/// the triangular factor come from back substitution (right) and forward
/// substitution on `T^T` (left), then map back through `Q`.
///
/// Fails with a convergence error when the Schur iteration stalls or when any
/// eigenpair residual exceeds `tol_resid`.
pub fn eig(g: &Generator, tol_resid: f64) -> Result<EigenSystem> {
    let a = g.matrix();
    let n = g.n();
    let (q, t) = complex_schur(a)?;
    let norm2 = g.norm2();
    let small = f64::EPSILON * norm2.max(f64::MIN_POSITIVE);

    let mut vals: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let qbar = q.map(|z| z.conj());
    for k in 0..n {
        let lambda = t[(k, k)];
        let denom = |i: usize| {
            let d = t[(i, i)] - lambda;
            if d.norm() < small {
                Complex64::new(small, 0.0)
            } else {
                d
            }
        };
        // T x = lambda x, x_k = 1, x_j = 0 for j > k
        let mut x = DVector::from_element(n, Complex64::new(0.0, 0.0));
        x[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
            x[i] = -s / denom(i);
            rescale_if_large(&mut x);
        }
        // T^T z = lambda z, z_k = 1, z_j = 0 for j < k
        let mut z = DVector::from_element(n, Complex64::new(0.0, 0.0));
        z[k] = Complex64::new(1.0, 0.0);
        for i in k + 1..n {
            let s: Complex64 = (k..i).map(|j| t[(j, i)] * z[j]).sum();
            z[i] = -s / denom(i);
            rescale_if_large(&mut z);
        }
        let mut v = &q * x;
        let vn = v.norm();
        v /= Complex64::new(vn, 0.0);
        // A^T = conj(Q) T^T Q^T, so y = conj(Q) z
        let mut y = &qbar * z;
        let yn = y.norm();
        y /= Complex64::new(yn, 0.0);
        right.push(v);
        left.push(y);
    }

    pair_conjugates(&mut vals, Some(&mut right), Some(&mut left), pairing_tol(a));

    let ac = a.map(|x| Complex64::new(x, 0.0));
    let act = ac.transpose();
    let scale = norm2.max(f64::MIN_POSITIVE);
    let resid = |m: &DMatrix<Complex64>, x: &DVector<Complex64>, l: Complex64| (m * x - x * l).norm() / (scale * x.norm());
    let residuals: Vec<f64> = (0..n).map(|k| resid(&ac, &right[k], vals[k])).collect();
    let left_residuals: Vec<f64> = (0..n).map(|k| resid(&act, &left[k], vals[k])).collect();
    let worst = residuals.iter().chain(&left_residuals).cloned().fold(0.0, f64::max);
    if !(worst <= tol_resid) && norm2 > 0.0 {
        return Err(Error::EigenConvergence { n, iterations: 0 });
    }
    Ok(EigenSystem {
        eigenvalues: vals,
        right_vectors: right,
        left_vectors: left,
        residuals,
        left_residuals,
        norm2,
    })
}

fn rescale_if_large(x: &mut DVector<Complex64>) {
    let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m > 1e150 {
        *x /= Complex64::new(m, 0.0);
    }
}

/// Real matrices have a spectrum symmetric under conjugation. Snap nearly
/// real eigenvalues onto the axis (with real eigenvectors) and make each
/// upper-half-plane eigenvalue's partner its exact conjugate.
fn pair_conjugates(
    vals: &mut [Complex64],
    mut right: Option<&mut Vec<DVector<Complex64>>>,
    mut left: Option<&mut Vec<DVector<Complex64>>>,
    tol: f64,
) {
    let n = vals.len();
    let mut done = vec![false; n];
    for k in 0..n {
        if vals[k].im.abs() <= tol {
            vals[k].im = 0.0;
            done[k] = true;
            for vecs in [right.as_deref_mut(), left.as_deref_mut()].into_iter().flatten() {
                vecs[k] = realify(&vecs[k]).map(|x| Complex64::new(x, 0.0));
                let nrm = vecs[k].norm();
                if nrm > 0.0 {
                    vecs[k] /= Complex64::new(nrm, 0.0);
                }
            }
        }
    }
    for k in 0..n {
        if done[k] || vals[k].im < 0.0 {
            continue;
        }
        let target = vals[k].conj();
        let partner = (0..n)
            .filter(|&j| !done[j] && j != k && vals[j].im < 0.0)
            .min_by(|&i, &j| (vals[i] - target).norm().total_cmp(&(vals[j] - target).norm()));
        done[k] = true;
        if let Some(j) = partner {
            done[j] = true;
            vals[j] = target;
            for vecs in [right.as_deref_mut(), left.as_deref_mut()].into_iter().flatten() {
                vecs[j] = vecs[k].map(|z| z.conj());
            }
        }
    }
}

/// Number of singular values of `lambda I - A` at or below `tol`.
pub fn geometric_multiplicity(a: &DMatrix<f64>, lambda: f64, tol: f64) -> usize {
    let mut m = -a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += lambda;
    }
    m.singular_values().iter().filter(|&&s| s <= tol).count()
}
