//! Laplacian on `[a, b]` with the nonlocal boundary condition
//! `u'(a) = (B u|)_1`, `u'(b) = -(B u|)_2`, where `u| = (u(a), u(b))`.
//!
//! Second-order differences on the `m + 2` nodes `a = x_0 < ... < x_{m+1} = b`
//! with ghost points eliminated through the boundary condition. The result is
//! self-adjoint in the trapezoid inner product whenever `B` is symmetric; in
//! general its adjoint there is the matrix built from `B^T`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DiscretizedOperator, Metadata};
use crate::error::{invalid, Result};
use crate::lattice::{BaseNorm, WeightedLattice};
use crate::spectral::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalSpec {
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(rename = "B")]
    pub bc: [[f64; 2]; 2],
    /// Interior points.
    pub m: usize,
}

fn one() -> f64 {
    1.0
}

impl NonlocalSpec {
    pub fn new(bc: [[f64; 2]; 2], m: usize) -> Self {
        Self { a: 0.0, b: 1.0, bc, m }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 4 {
            return Err(invalid("m", "need at least 4 interior points"));
        }
        if !(self.b > self.a) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(invalid("b", "interval must satisfy a < b"));
        }
        if self.bc.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("B", "entries must be finite"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.m + 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.m + 2)
            .map(|i| if i == self.m + 1 { self.b } else { self.a + h * i as f64 })
            .collect()
    }

    /// Trapezoid weights `(h/2, h, ..., h, h/2)`.
    pub fn quadrature(&self) -> Vec<f64> {
        let h = self.h();
        let n = self.m + 2;
        (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect()
    }
}

/// Difference matrix only, without validation of symmetry.
pub fn nonlocal_matrix(spec: &NonlocalSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = spec.m + 2;
    let h = spec.h();
    let ih2 = 1.0 / (h * h);
    let [[b11, b12], [b21, b22]] = spec.bc;
    let mut a = DMatrix::zeros(n, n);
    for i in 1..n - 1 {
        a[(i, i - 1)] = ih2;
        a[(i, i)] = -2.0 * ih2;
        a[(i, i + 1)] = ih2;
    }
    // u_{-1} = u_1 - 2h (b11 u_0 + b12 u_{m+1}); u_{m+2} = u_m - 2h (b21 u_0 + b22 u_{m+1})
    let two_ih2 = 2.0 * ih2;
    let two_ih = 2.0 / h;
    a[(0, 1)] = two_ih2;
    a[(0, 0)] = -two_ih2 - two_ih * b11;
    a[(0, n - 1)] += -two_ih * b12;
    a[(n - 1, n - 2)] = two_ih2;
    a[(n - 1, n - 1)] = -two_ih2 - two_ih * b22;
    a[(n - 1, 0)] += -two_ih * b21;
    Ok(a)
}

pub fn build_nonlocal_laplacian(spec: &NonlocalSpec) -> Result<DiscretizedOperator> {
    let a = nonlocal_matrix(spec)?;
    let n = a.nrows();
    let quad = spec.quadrature();
    let label = format!("nonlocal_laplacian(B={:?}, m={})", spec.bc, spec.m);
    let generator = if spec.bc[0][1] == spec.bc[1][0] {
        Generator::quad_symmetric(a, &quad, label)?
    } else {
        Generator::new(a, label)?
    };
    let lattice = WeightedLattice::new(vec![1.0; n], vec![1.0; n], BaseNorm::L2, quad)?;
    Ok(DiscretizedOperator {
        generator,
        lattice,
        metadata: Metadata::Grid { nodes: spec.nodes() },
    })
}

/// `Q^{-1} A^T Q` for the diagonal quadrature `Q`: the adjoint in the weighted inner product.
pub fn weighted_adjoint(a: &DMatrix<f64>, quad: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(j, i)] * quad[j] / quad[i])
}

/// `J A J` with `J` the reversal permutation.
pub fn reversed(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| a[(n - 1 - i, n - 1 - j)])
}
