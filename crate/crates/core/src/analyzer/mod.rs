//! Spectral certificates for uniform eventual strong positivity and the
//! quantitative bounds `e^{tA} >= eps (u phi^T)` that follow from them.
//!
//! The certificate checks, for a generator `A` and a weighted lattice with
//! weights `u` and `phi`:
//!
//! 1. the spectral bound `s(A)` is attained by a single real eigenvalue which
//!    strictly dominates the real parts of the rest of the spectrum;
//! 2. that eigenvalue is geometrically and algebraically simple;
//! 3. its right eigenvector `v` and left eigenvector `psi` are comparable to
//!    the weights: `c1 u <= v <= c2 u` and `d1 phi <= psi <= d2 phi` with
//!    `c1, d1 > 0`.
//!
//! Under these conditions `e^{t(A - s(A))} -> v psi^T` with `<psi, v> = 1`,
//! and once `|e^{t(A - s)} (I - P)|` is below `delta` in the norm from
//! `al(psi)` to `gauge(v)` the semigroup dominates `(1 - delta) c1 d1 u phi^T`.
//! In finite dimensions the smoothing times of the infinite-dimensional
//! theory are zero, and individual and uniform eventual positivity coincide
//! under a passing certificate; both computations are still offered.

mod bounds;
mod scans;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{strong_positivity_margin, WeightedLattice};
use crate::spectral::{eig, geometric_multiplicity, symmetry_defect, Generator, EigenSystem, SYMMETRY_TOL};

pub use bounds::{individual_t0, uniform_t0, EventualPositivityResult, Mode};
pub use scans::{positivity_scan, resolvent_positivity_check, PositivityScan, ResolventMargin};

/// Recorded in reports: the distinction between individual and uniform
/// eventual positivity does not exist in finite dimensions.
pub const FINITE_DIMENSION_CAVEAT: &str = "finite-dimensional model: individual and uniform eventual positivity \
     coincide under a passing certificate; smoothing times t1 = t2 = 0";

/// Numerical thresholds. Fields ending in `_rel` are multiplied by `||A||_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub resid: f64,
    pub cluster_rel: f64,
    pub gap_rel: f64,
    pub imag_rel: f64,
    pub rank_rel: f64,
    pub pos: f64,
    pub defect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            resid: 1e-8,
            cluster_rel: 1e-8,
            gap_rel: 1e-8,
            imag_rel: 1e-8,
            rank_rel: 1e-8,
            pos: 1e-9,
            defect: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReasonCode {
    /// Another eigenvalue has real part within the gap tolerance of `s(A)`.
    Dominance,
    /// The spectral bound is attained only by non-real eigenvalues.
    ComplexDominant,
    GeoMult,
    Defective,
    VNotPos,
    PsiNotPos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub reasons: Vec<ReasonCode>,
}

impl Verdict {
    fn from_reasons(reasons: Vec<ReasonCode>) -> Self {
        Self {
            passed: reasons.is_empty(),
            reasons,
        }
    }

    pub fn describe(&self) -> String {
        if self.passed {
            "pass".to_string()
        } else {
            self.reasons
                .iter()
                .map(|r| serde_json_like(*r))
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

fn serde_json_like(r: ReasonCode) -> &'static str {
    match r {
        ReasonCode::Dominance => "DOMINANCE",
        ReasonCode::ComplexDominant => "COMPLEX_DOMINANT",
        ReasonCode::GeoMult => "GEO_MULT",
        ReasonCode::Defective => "DEFECTIVE",
        ReasonCode::VNotPos => "V_NOT_POS",
        ReasonCode::PsiNotPos => "PSI_NOT_POS",
    }
}

/// `c1 u <= v <= c2 u`, `d1 phi <= psi <= d2 phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConstants {
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificatePath {
    General,
    SelfAdjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    pub spectral_bound: f64,
    /// `max Re` over the spectrum outside the dominant cluster; `None` when there is none.
    pub second_abscissa: Option<f64>,
    /// `s(A) - second_abscissa`, infinite (serialized as `null`) for a one-point spectrum.
    #[serde(with = "nonfinite")]
    pub dominance_gap: f64,
    pub dominant_is_real: bool,
    pub geometric_simple: bool,
    pub algebraic_simple: bool,
    /// Right eigenvector, unit Euclidean norm, `sum phi_i v_i > 0`. Empty when undefined.
    pub v: Vec<f64>,
    /// Left eigenvector scaled so that `<psi, v> = 1`. Empty when undefined.
    pub psi: Vec<f64>,
    pub constants: Option<EquivalenceConstants>,
    pub verdict: Verdict,
    pub smoothing_times: (f64, f64),
    pub path: CertificatePath,
}

impl SpectralCertificate {
    pub fn passed(&self) -> bool {
        self.verdict.passed
    }

    /// `c1 * d1`, the rank-one lower bound constant.
    pub fn c1d1(&self) -> Option<f64> {
        self.constants.map(|c| c.c1 * c.d1)
    }
}

mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_some(x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

struct Scaled {
    cluster: f64,
    gap: f64,
    imag: f64,
    rank: f64,
}

fn scaled(t: &Tolerances, norm2: f64) -> Scaled {
    let s = norm2.max(f64::MIN_POSITIVE);
    Scaled {
        cluster: t.cluster_rel * s,
        gap: t.gap_rel * s,
        imag: t.imag_rel * s,
        rank: t.rank_rel * s,
    }
}

/// Normalizes `(v, psi)` and fills the comparison constants and positivity reasons.
fn finish_vectors(
    mut v: DVector<f64>,
    mut psi: DVector<f64>,
    l: &WeightedLattice,
    tol: &Tolerances,
    reasons: &mut Vec<ReasonCode>,
) -> Result<(Vec<f64>, Vec<f64>, Option<EquivalenceConstants>)> {
    let phi = DVector::from_column_slice(l.phi());
    let u = DVector::from_column_slice(l.u());
    if v.dot(&phi) < 0.0 {
        v = -v;
    }
    if psi.dot(&u) < 0.0 {
        psi = -psi;
    }
    v /= v.norm();
    let ip = psi.dot(&v);
    if ip == 0.0 || !ip.is_finite() {
        reasons.push(ReasonCode::Defective);
        return Ok((v.as_slice().to_vec(), psi.as_slice().to_vec(), None));
    }
    psi /= ip;
    let (v, psi) = (v.as_slice().to_vec(), psi.as_slice().to_vec());
    let ratio_bounds = |x: &[f64], w: &[f64]| -> Result<(f64, f64)> {
        let lo = strong_positivity_margin(x, w)?.value;
        let neg: Vec<f64> = x.iter().map(|a| -a).collect();
        let hi = -strong_positivity_margin(&neg, w)?.value;
        Ok((lo, hi))
    };
    let (c1, c2) = ratio_bounds(&v, l.u())?;
    let (d1, d2) = ratio_bounds(&psi, l.phi())?;
    if !(c1 > tol.pos) {
        reasons.push(ReasonCode::VNotPos);
    }
    if !(d1 > tol.pos) {
        reasons.push(ReasonCode::PsiNotPos);
    }
    Ok((v, psi, Some(EquivalenceConstants { c1, c2, d1, d2 })))
}

/// General (nonsymmetric) certificate from the full eigendecomposition.
pub fn check_criteria(g: &Generator, l: &WeightedLattice, tol: &Tolerances) -> Result<SpectralCertificate> {
    crate::error::check_dim(g.n(), l.n())?;
    let es = eig(g, tol.resid)?;
    certificate_from_eigensystem(g, &es, l, tol)
}

pub fn certificate_from_eigensystem(
    g: &Generator,
    es: &EigenSystem,
    l: &WeightedLattice,
    tol: &Tolerances,
) -> Result<SpectralCertificate> {
    let th = scaled(tol, es.norm2());
    let vals = &es.eigenvalues;
    let s = es.spectral_abscissa();
    let candidates: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].re >= s - th.gap).collect();
    let real_candidates: Vec<usize> = candidates.iter().copied().filter(|&k| vals[k].im.abs() <= th.imag).collect();

    let mut reasons = Vec::new();
    let mut cert = SpectralCertificate {
        spectral_bound: s,
        second_abscissa: None,
        dominance_gap: 0.0,
        dominant_is_real: false,
        geometric_simple: false,
        algebraic_simple: false,
        v: vec![],
        psi: vec![],
        constants: None,
        verdict: Verdict::from_reasons(vec![]),
        smoothing_times: (0.0, 0.0),
        path: CertificatePath::General,
    };

    let Some(&lead) = real_candidates
        .iter()
        .max_by(|&&a, &&b| vals[a].re.total_cmp(&vals[b].re))
    else {
        reasons.push(ReasonCode::ComplexDominant);
        cert.second_abscissa = Some(s);
        cert.verdict = Verdict::from_reasons(reasons);
        return Ok(cert);
    };
    cert.dominant_is_real = true;
    let lambda = vals[lead].re;
    let cluster: Vec<usize> = (0..vals.len())
        .filter(|&k| (vals[k] - Complex64::new(lambda, 0.0)).norm() <= th.cluster)
        .collect();
    let rest_abscissa = (0..vals.len())
        .filter(|k| !cluster.contains(k))
        .map(|k| vals[k].re)
        .fold(f64::NEG_INFINITY, f64::max);
    cert.second_abscissa = rest_abscissa.is_finite().then_some(rest_abscissa);
    cert.dominance_gap = lambda - rest_abscissa;
    if candidates.iter().any(|k| !cluster.contains(k)) {
        reasons.push(ReasonCode::Dominance);
    }

    if cluster.len() > 1 {
        let geo = geometric_multiplicity(g.matrix(), lambda, th.rank);
        if geo > 1 {
            reasons.push(ReasonCode::GeoMult);
        } else {
            cert.geometric_simple = true;
            reasons.push(ReasonCode::Defective);
        }
        cert.verdict = Verdict::from_reasons(reasons);
        return Ok(cert);
    }
    cert.geometric_simple = geometric_multiplicity(g.matrix(), lambda, th.rank) <= 1;
    if !cert.geometric_simple {
        reasons.push(ReasonCode::GeoMult);
    }
    cert.algebraic_simple = es.overlap(lead) >= tol.defect;
    if !cert.algebraic_simple {
        reasons.push(ReasonCode::Defective);
    }
    let (v, psi) = es.real_pair(lead);
    let (v, psi, constants) = finish_vectors(v, psi, l, tol, &mut reasons)?;
    cert.v = v;
    cert.psi = psi;
    cert.constants = constants;
    reasons.dedup();
    cert.verdict = Verdict::from_reasons(reasons);
    Ok(cert)
}

/// Certificate for generators symmetric in the quadrature inner product:
/// the left eigenvector is `psi_i = quad_i v_i`, no separate left problem.
pub fn self_adjoint_path(g: &Generator, l: &WeightedLattice, tol: &Tolerances) -> Result<SpectralCertificate> {
    crate::error::check_dim(g.n(), l.n())?;
    let q = l.quad();
    let defect = symmetry_defect(g.matrix(), q)?;
    if defect > SYMMETRY_TOL {
        return Err(Error::SymmetryViolation {
            defect,
            tolerance: SYMMETRY_TOL,
        });
    }
    let n = g.n();
    let a = g.matrix();
    let sq: Vec<f64> = q.iter().map(|x| x.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| sq[i] * a[(i, j)] / sq[j]);
    let s = (&s + s.transpose()) * 0.5;
    let norm2 = g.norm2();
    let th = scaled(tol, norm2);
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = eig.eigenvalues[order[0]];
    let cluster = order.iter().filter(|&&k| top - eig.eigenvalues[k] <= th.cluster).count();
    let rest = order
        .iter()
        .map(|&k| eig.eigenvalues[k])
        .filter(|&x| top - x > th.cluster)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut reasons = Vec::new();
    let mut cert = SpectralCertificate {
        spectral_bound: top,
        second_abscissa: rest.is_finite().then_some(rest),
        dominance_gap: top - rest,
        dominant_is_real: true,
        geometric_simple: cluster == 1,
        algebraic_simple: cluster == 1,
        v: vec![],
        psi: vec![],
        constants: None,
        verdict: Verdict::from_reasons(vec![]),
        smoothing_times: (0.0, 0.0),
        path: CertificatePath::SelfAdjoint,
    };
    if cluster > 1 {
        reasons.push(ReasonCode::GeoMult);
        cert.verdict = Verdict::from_reasons(reasons);
        return Ok(cert);
    }
    if top - rest <= th.gap {
        reasons.push(ReasonCode::Dominance);
    }
    let w = eig.eigenvectors.column(order[0]);
    let v = DVector::from_fn(n, |i, _| w[i] / sq[i]);
    let psi = DVector::from_fn(n, |i, _| q[i] * v[i]);
    let (v, psi, constants) = finish_vectors(v, psi, l, tol, &mut reasons)?;
    cert.v = v;
    cert.psi = psi;
    cert.constants = constants;
    cert.verdict = Verdict::from_reasons(reasons);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BaseNorm;

    fn gen(rows: usize, data: &[f64]) -> Generator {
        Generator::new(DMatrix::from_row_slice(rows, rows, data), "t").unwrap()
    }

    fn ones(n: usize) -> WeightedLattice {
        WeightedLattice::uniform(n, BaseNorm::L2).unwrap()
    }

    #[test]
    fn swap_matrix_passes() {
        let c = check_criteria(&gen(2, &[0.0, 1.0, 1.0, 0.0]), &ones(2), &Tolerances::default()).unwrap();
        assert!(c.passed(), "{:?}", c.verdict);
        assert!((c.spectral_bound - 1.0).abs() < 1e-14);
        assert!((c.dominance_gap - 2.0).abs() < 1e-14);
        let k = c.constants.unwrap();
        assert!((k.c1 - k.c2).abs() < 1e-14 && (k.d1 - k.d2).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in c.v.iter().zip(&c.psi) {
            assert!((a - s).abs() < 1e-14 && (b - s).abs() < 1e-14);
        }
        assert_eq!(c.smoothing_times, (0.0, 0.0));
    }

    #[test]
    fn identity_fails_geometric_multiplicity() {
        let c = check_criteria(&gen(2, &[1.0, 0.0, 0.0, 1.0]), &ones(2), &Tolerances::default()).unwrap();
        assert_eq!(c.verdict.reasons, vec![ReasonCode::GeoMult]);
    }

    #[test]
    fn rotation_fails_complex_dominant() {
        let c = check_criteria(&gen(2, &[0.0, -1.0, 1.0, 0.0]), &ones(2), &Tolerances::default()).unwrap();
        assert_eq!(c.verdict.reasons, vec![ReasonCode::ComplexDominant]);
    }

    #[test]
    fn jordan_block_fails_defective() {
        let c = check_criteria(&gen(2, &[0.0, 1.0, 0.0, 0.0]), &ones(2), &Tolerances::default()).unwrap();
        assert_eq!(c.verdict.reasons, vec![ReasonCode::Defective]);
        assert!(c.geometric_simple);
    }

    #[test]
    fn sign_changing_eigenvector_fails() {
        // dominant eigenvector (1, -1)
        let c = check_criteria(&gen(2, &[0.0, -1.0, -1.0, 0.0]), &ones(2), &Tolerances::default()).unwrap();
        assert!(c.verdict.reasons.contains(&ReasonCode::VNotPos));
        assert!(c.verdict.reasons.contains(&ReasonCode::PsiNotPos));
    }

    #[test]
    fn close_real_competitor_fails_dominance() {
        let c = check_criteria(&gen(2, &[1.0, 0.0, 0.0, 1.0 - 1e-10]), &ones(2), &Tolerances::default()).unwrap();
        assert!(!c.passed());
    }

    #[test]
    fn one_dimensional_spectrum_has_infinite_gap() {
        let c = check_criteria(&gen(1, &[-3.0]), &ones(1), &Tolerances::default()).unwrap();
        assert!(c.passed());
        assert_eq!(c.dominance_gap, f64::INFINITY);
        assert_eq!(c.second_abscissa, None);
    }

    #[test]
    fn self_adjoint_path_symmetric_example() {
        let g = gen(2, &[-2.0, 1.0, 1.0, -2.0]);
        let c = self_adjoint_path(&g, &ones(2), &Tolerances::default()).unwrap();
        assert!(c.passed());
        for (a, b) in c.v.iter().zip(&c.psi) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(c.path, CertificatePath::SelfAdjoint);
        let general = check_criteria(&g, &ones(2), &Tolerances::default()).unwrap();
        assert_eq!(general.verdict, c.verdict);
    }

    #[test]
    fn self_adjoint_path_rejects_nonsymmetric() {
        let g = gen(2, &[-1.0, 1.0, 0.0, -2.0]);
        assert!(matches!(
            self_adjoint_path(&g, &ones(2), &Tolerances::default()),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn self_adjoint_path_uses_quadrature() {
        // q-symmetric for q = (1, 2): q_0 a_01 = 2 = q_1 a_10
        let g = gen(2, &[-3.0, 2.0, 1.0, -2.0]);
        let l = WeightedLattice::new(vec![1.0; 2], vec![1.0; 2], BaseNorm::L2, vec![1.0, 2.0]).unwrap();
        let c = self_adjoint_path(&g, &l, &Tolerances::default()).unwrap();
        let general = check_criteria(&g, &l, &Tolerances::default()).unwrap();
        assert!(c.passed() && general.passed());
        assert!((c.spectral_bound - general.spectral_bound).abs() < 1e-12);
        for (a, b) in c.psi.iter().zip(&general.psi) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
