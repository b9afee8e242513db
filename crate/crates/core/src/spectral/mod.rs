//! Dense spectral computations for real generators.

mod eig;
mod expm;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use eig::{eig, eigenvalues, geometric_multiplicity, EigenSystem};
pub use expm::{expm, expm_matrix, expm_series, ExpmSeries};

/// A semigroup generator `A` (a dense real matrix).
///
/// `symmetric` marks symmetry with respect to a diagonal quadrature inner
/// product `<f, g> = sum_i q_i f_i g_i`, i.e. `q_i A_ij = q_j A_ji`. For
/// unit quadrature this is ordinary symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    a: DMatrix<f64>,
    symmetric: bool,
    label: String,
}

pub const SYMMETRY_TOL: f64 = 1e-12;

impl Generator {
    pub fn new(a: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(invalid(
                "A",
                format!("generator must be a non-empty square matrix, got {}x{}", a.nrows(), a.ncols()),
            ));
        }
        if let Some(bad) = a.iter().find(|x| !x.is_finite()) {
            return Err(invalid("A", format!("non-finite entry {bad}")));
        }
        Ok(Self {
            a,
            symmetric: false,
            label: label.into(),
        })
    }

    /// Builds a generator and checks `A = A^T` within `1e-12 ||A||_max`.
    pub fn symmetric(a: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        let n = a.nrows();
        Self::quad_symmetric(a, &vec![1.0; n], label)
    }

    /// Builds a generator and checks `q_i A_ij = q_j A_ji` within `1e-12 max |q_i A_ij|`.
    pub fn quad_symmetric(a: DMatrix<f64>, quad: &[f64], label: impl Into<String>) -> Result<Self> {
        let mut g = Self::new(a, label)?;
        let defect = symmetry_defect(&g.a, quad)?;
        if defect > SYMMETRY_TOL {
            return Err(Error::SymmetryViolation {
                defect,
                tolerance: SYMMETRY_TOL,
            });
        }
        g.symmetric = true;
        Ok(g)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `A + c I`, keeping the symmetry flag.
    pub fn shifted(&self, c: f64) -> Self {
        let mut a = self.a.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += c;
        }
        Self {
            a,
            symmetric: self.symmetric,
            label: self.label.clone(),
        }
    }

    /// Spectral norm `||A||_2`.
    pub fn norm2(&self) -> f64 {
        self.a.clone().singular_values().max()
    }
}

/// `max_ij |q_i A_ij - q_j A_ji| / max_ij |q_i A_ij|` (zero for the zero matrix).
pub fn symmetry_defect(a: &DMatrix<f64>, quad: &[f64]) -> Result<f64> {
    crate::error::check_dim(a.nrows(), quad.len())?;
    let n = a.nrows();
    let (mut defect, mut scale) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let x = quad[i] * a[(i, j)];
            scale = scale.max(x.abs());
            defect = defect.max((x - quad[j] * a[(j, i)]).abs());
        }
    }
    Ok(if scale == 0.0 { 0.0 } else { defect / scale })
}

/// `(lambda I - A)^{-1}` with its residual and a 1-norm condition estimate.
#[derive(Debug, Clone)]
pub struct Resolvent {
    pub matrix: DMatrix<Complex64>,
    /// `||(lambda I - A) R - I||_max`
    pub residual: f64,
    pub condition: f64,
}

impl Resolvent {
    /// Real part of the resolvent (exact for real `lambda`).
    pub fn real(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }
}

/// Shifted systems whose 1-norm condition exceeds this are rejected.
pub const RESOLVENT_MAX_CONDITION: f64 = 1e13;

pub fn resolvent(g: &Generator, lambda: Complex64) -> Result<Resolvent> {
    let n = g.n();
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let a = Complex64::new(-g.a[(i, j)], 0.0);
        if i == j {
            a + lambda
        } else {
            a
        }
    });
    let singular = |condition| Error::SingularResolvent {
        lambda: format!("{lambda}"),
        condition,
    };
    let inv = shifted.clone().try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let condition = norm1(&shifted) * norm1(&inv);
    if !condition.is_finite() || condition > RESOLVENT_MAX_CONDITION {
        return Err(singular(condition));
    }
    let check = &shifted * &inv;
    let residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (check[(i, j)] - target).norm()
        })
        .fold(0.0, f64::max);
    Ok(Resolvent {
        matrix: inv,
        residual,
        condition,
    })
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Relative cluster tolerance: eigenvalues closer than `1e-8 ||A||_2` are one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// `|<psi, v>| < 1e-8 |psi| |v|` flags a defective eigenvalue.
pub const DEFECT_TOL: f64 = 1e-8;

/// Rank-one spectral projection `P = v psi^T / <psi, v>` for a simple real eigenvalue.
pub fn spectral_projection(g: &Generator, lambda: f64, es: &EigenSystem) -> Result<DMatrix<f64>> {
    let norm = es.norm2().max(f64::MIN_POSITIVE);
    let tol = CLUSTER_TOL * norm.max(1.0);
    let target = Complex64::new(lambda, 0.0);
    let cluster: Vec<usize> = (0..es.len())
        .filter(|&k| (es.eigenvalues[k] - target).norm() <= tol)
        .collect();
    match cluster.len() {
        0 => Err(Error::NotAnEigenvalue { lambda }),
        1 => {
            let k = cluster[0];
            let (v, psi) = es.real_pair(k);
            let overlap: f64 = v.dot(&psi);
            let rel = overlap.abs() / (v.norm() * psi.norm());
            if rel < DEFECT_TOL {
                return Err(Error::Defective { lambda, overlap: rel });
            }
            Ok(&v * psi.transpose() / overlap)
        }
        count => {
            let geometric = geometric_multiplicity(g.matrix(), lambda, tol);
            if geometric < count {
                Err(Error::Defective { lambda, overlap: 0.0 })
            } else {
                Err(Error::NotSimple {
                    lambda,
                    count,
                    geometric,
                })
            }
        }
    }
}
