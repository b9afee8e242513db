//! Random test generators with known spectral data.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DiscretizedOperator, Metadata};
use crate::error::{invalid, Result};
use crate::lattice::{BaseNorm, WeightedLattice};
use crate::spectral::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// `s v psi^T + (I - v psi^T) G (I - v psi^T)` with `v, psi > 0` and the
    /// compressed `G` (fast rotation included) strictly below `s`.
    Certified,
    /// Irreducible Metzler matrix (positive semigroup).
    Metzler,
    /// Identity: dominant eigenvalue of multiplicity `n`.
    Identity,
    /// Block-diagonal plane rotations: dominant eigenvalues non-real.
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_n() -> usize {
    5
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", "need at least 2"));
        }
        if self.kind == SyntheticKind::Rotation && self.n % 2 == 1 {
            return Err(invalid("n", "rotation generators need even n"));
        }
        Ok(())
    }
}

pub fn build_synthetic(spec: &SyntheticSpec) -> Result<DiscretizedOperator> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let label = format!("synthetic({:?}, seed={}, n={n})", spec.kind, spec.seed);
    let uniform = || WeightedLattice::uniform(n, BaseNorm::L2);
    let (a, lattice, metadata) = match spec.kind {
        SyntheticKind::Certified => {
            let c = certified(n, &mut rng);
            let lattice = uniform()?;
            (
                c.a,
                lattice,
                Metadata::Synthetic {
                    s: Some(c.s),
                    v: Some(c.v),
                    psi: Some(c.psi),
                },
            )
        }
        SyntheticKind::Metzler => {
            let a = DMatrix::from_fn(n, n, |i, j| if i == j { -rng.random_range(0.0..3.0) } else { rng.random_range(0.05..1.0) });
            (a, uniform()?, Metadata::Synthetic { s: None, v: None, psi: None })
        }
        SyntheticKind::Identity => (DMatrix::identity(n, n), uniform()?, Metadata::Synthetic { s: Some(1.0), v: None, psi: None }),
        SyntheticKind::Rotation => {
            let mut a = DMatrix::zeros(n, n);
            for b in 0..n / 2 {
                let w = rng.random_range(0.5..3.0);
                a[(2 * b, 2 * b + 1)] = -w;
                a[(2 * b + 1, 2 * b)] = w;
            }
            (a, uniform()?, Metadata::Synthetic { s: Some(0.0), v: None, psi: None })
        }
    };
    Ok(DiscretizedOperator {
        generator: Generator::new(a, label)?,
        lattice,
        metadata,
    })
}

/// A generator with prescribed dominant eigenvalue and eigenvectors.
#[derive(Debug, Clone)]
pub struct CertifiedSample {
    pub a: DMatrix<f64>,
    pub s: f64,
    /// Unit Euclidean norm.
    pub v: Vec<f64>,
    /// `<psi, v> = 1`.
    pub psi: Vec<f64>,
    /// Lower bound for `s` minus the real parts of the rest of the spectrum.
    pub gap: f64,
}

/// Random `A = s P + (I - P)(R - rho I)(I - P)` with `P = v psi^T`; `rho`
/// exceeds the spectral norm of the compressed `R` by the gap.
pub fn certified<R: Rng>(n: usize, rng: &mut R) -> CertifiedSample {
    let s = rng.random_range(-1.0..1.0);
    let mut v = DVector::from_fn(n, |_, _| rng.random_range(0.3..2.0));
    v /= v.norm();
    let mut psi = DVector::from_fn(n, |_, _| rng.random_range(0.3..2.0));
    psi /= psi.dot(&v);
    let p = &v * psi.transpose();
    let q = DMatrix::identity(n, n) - &p;
    let omega = rng.random_range(0.0..10.0);
    let r = DMatrix::from_fn(n, n, |i, j| {
        let noise: f64 = rng.random_range(-1.0..1.0);
        let skew = if i < j { omega } else if i > j { -omega } else { 0.0 };
        noise + skew
    });
    let compressed = &q * &r * &q;
    let gap = rng.random_range(0.2..2.0);
    let rho = compressed.clone().singular_values().max() - s + gap;
    let a = &p * s + &compressed - &q * rho;
    CertifiedSample {
        a,
        s,
        v: v.as_slice().to_vec(),
        psi: psi.as_slice().to_vec(),
        gap,
    }
}
