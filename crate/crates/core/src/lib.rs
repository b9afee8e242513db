//! Eventual positivity of matrix semigroups on weighted lattices.
//!
//! The crate is organised as
//!
//! - [`lattice`]: weighted lattices, gauge and AL norms, operator norms
//!   between them, and the duality inequality;
//! - [`spectral`]: generators, eigendecompositions with left and right
//!   eigenvectors, the matrix exponential, resolvents and spectral projections;
//! - [`analyzer`]: the spectral certificate and the quantitative bound
//!   `e^{tA} >= eps u phi^T` for `t >= t0`;
//! - [`models`]: discretisations of concrete generators (Dirichlet-to-Neumann
//!   operators on the disc, Laplacians with nonlocal boundary conditions,
//!   the clamped beam, a delay equation) and synthetic test generators.
//!
//! ```
//! use evpos::analyzer::{check_criteria, uniform_t0, Tolerances};
//! use evpos::grid::GridSpec;
//! use evpos::lattice::{BaseNorm, WeightedLattice};
//! use evpos::spectral::Generator;
//! use nalgebra::DMatrix;
//!
//! let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
//! let g = Generator::new(a, "swap")?;
//! let l = WeightedLattice::uniform(2, BaseNorm::L2)?;
//! let cert = check_criteria(&g, &l, &Tolerances::default())?;
//! assert!(cert.passed());
//! let r = uniform_t0(&g, &cert, &l, 0.5, &GridSpec::for_gap(cert.dominance_gap))?;
//! assert!((r.epsilon - 0.25).abs() < 1e-12);
//! # Ok::<(), evpos::Error>(())
//! ```

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyzer;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
