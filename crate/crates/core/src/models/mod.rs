//! Discretised model generators and their analytic side channels.

pub mod beam;
pub mod bessel;
pub mod dde;
pub mod delay;
pub mod dtn;
pub mod nonlocal;
pub mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::WeightedLattice;
use crate::spectral::Generator;

pub use beam::{beam_wavenumber, build_clamped_beam, BeamSpec};
pub use bessel::{bessel, BesselKind};
pub use dde::{simulate_dde, Trajectory};
pub use delay::{build_delay, delay_char_residual, delay_dominance_scan, dual_profile, DelaySpec, DominanceScan, Window};
pub use dtn::{build_dtn, dtn_kernel, dtn_sweep, dtn_symbol, DtnSpec, SweepRow};
pub use nonlocal::{build_nonlocal_laplacian, NonlocalSpec};
pub use synthetic::{build_synthetic, SyntheticKind, SyntheticSpec};

/// A generator with the lattice it should be analysed on.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub generator: Generator,
    pub lattice: WeightedLattice,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Metadata {
    /// `symbols[n] = d_n` for `n = 0..`, and the grid angles.
    Dtn { symbols: Vec<f64>, thetas: Vec<f64> },
    Grid { nodes: Vec<f64> },
    Delay { c: f64, nodes: Vec<f64> },
    Synthetic {
        s: Option<f64>,
        v: Option<Vec<f64>>,
        psi: Option<Vec<f64>>,
    },
}

/// Every model family with its discretisation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Dtn(DtnSpec),
    NonlocalLaplacian(NonlocalSpec),
    ClampedBeam(BeamSpec),
    Delay(DelaySpec),
    Synthetic(SyntheticSpec),
}

impl OperatorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Dtn(_) => "dtn",
            Self::NonlocalLaplacian(_) => "nonlocal_laplacian",
            Self::ClampedBeam(_) => "clamped_beam",
            Self::Delay(_) => "delay",
            Self::Synthetic(_) => "synthetic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Dtn(s) => s.validate(),
            Self::NonlocalLaplacian(s) => s.validate(),
            Self::ClampedBeam(s) => s.validate(),
            Self::Delay(s) => s.validate(),
            Self::Synthetic(s) => s.validate(),
        }
    }

    pub fn build(&self) -> Result<DiscretizedOperator> {
        match self {
            Self::Dtn(s) => build_dtn(s),
            Self::NonlocalLaplacian(s) => build_nonlocal_laplacian(s),
            Self::ClampedBeam(s) => build_clamped_beam(s),
            Self::Delay(s) => build_delay(s),
            Self::Synthetic(s) => build_synthetic(s),
        }
    }
}

/// One entry of the operator catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogueEntry {
    pub kind: &'static str,
    pub parameters: &'static str,
    pub summary: &'static str,
}

/// Builtin operator kinds, sorted by name.
pub const CATALOGUE: [CatalogueEntry; 5] = [
    CatalogueEntry {
        kind: "clamped_beam",
        parameters: "m: interior points (>= 8)",
        summary: "-u'''' on (0,1) with u = u' = 0 at both ends; weights dist(x, {0,1})^2",
    },
    CatalogueEntry {
        kind: "delay",
        parameters: "c: coefficient (> 0); m: even number of intervals on [-2,0] (>= 8)",
        summary: "y' = c(int_{t-2}^{t-1} y - int_{t-1}^t y + y(t-2) - y(t)) on states (x, f)",
    },
    CatalogueEntry {
        kind: "dtn",
        parameters: "lambda: real; N: mode cutoff (>= M/2); M: grid points (>= 4)",
        summary: "minus the Dirichlet-to-Neumann operator of Delta - lambda on the unit disc",
    },
    CatalogueEntry {
        kind: "nonlocal_laplacian",
        parameters: "a, b: interval (default [0,1]); B: 2x2 boundary matrix; m: interior points (>= 4)",
        summary: "u'' with u'(a) = (Bu|)_1, u'(b) = -(Bu|)_2",
    },
    CatalogueEntry {
        kind: "synthetic",
        parameters: "kind: certified | metzler | identity | rotation; seed: integer; n: size (default 5)",
        summary: "random test generators with known spectral data",
    },
];

pub fn catalogue() -> &'static [CatalogueEntry] {
    &CATALOGUE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_is_sorted_and_matches_kinds() {
        let kinds: Vec<_> = CATALOGUE.iter().map(|e| e.kind).collect();
        let mut sorted = kinds.clone();
        sorted.sort();
        assert_eq!(kinds, sorted);
        let spec: OperatorSpec = serde_json::from_str(r#"{"type": "delay", "c": 0.5, "m": 20}"#).unwrap();
        assert!(kinds.contains(&spec.kind()));
    }

    #[test]
    fn spec_round_trip() {
        let specs = [
            r#"{"type":"dtn","lambda":-1.0,"N":64,"M":128}"#,
            r#"{"type":"nonlocal_laplacian","a":0.0,"b":1.0,"B":[[1.0,1.0],[1.0,1.0]],"m":50}"#,
            r#"{"type":"clamped_beam","m":20}"#,
            r#"{"type":"synthetic","kind":"certified","seed":3,"n":4}"#,
        ];
        for s in specs {
            let spec: OperatorSpec = serde_json::from_str(s).unwrap();
            let back: OperatorSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
            assert_eq!(spec, back);
            assert!(spec.build().is_ok());
        }
        assert!(serde_json::from_str::<OperatorSpec>(r#"{"type":"heat","m":3}"#).is_err());
        assert!(serde_json::from_str::<OperatorSpec>(r#"{"type":"delay","c":1.0,"m":20,"x":0}"#).is_err());
    }
}
