//! Weighted cone arithmetic on `R^n`.
//!
//! A [`WeightedLattice`] carries three norm structures on the same space:
//! the base norm (a weighted `l^p` norm), the gauge norm `max_i |f_i| / u_i`
//! of the principal ideal generated by a strictly positive vector `u`, and
//! the additive norm `sum_i phi_i |f_i|` induced by a strictly positive
//! functional `phi`. In finite dimensions all three are equivalent, so the
//! interesting content is the size of the constants, which is what
//! [`op_norm`] measures.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};

/// Exponent of the base norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseNorm {
    L1,
    L2,
    Inf,
}

/// The finite-dimensional model of a Banach lattice with a quasi-interior
/// point `u` and a strictly positive functional `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLattice {
    u: Vec<f64>,
    phi: Vec<f64>,
    p: BaseNorm,
    quad: Vec<f64>,
}

fn check_positive(name: &'static str, w: &[f64]) -> Result<()> {
    match w.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        None => Ok(()),
        Some(i) => Err(invalid(
            name,
            format!("entry {i} is {} but must be strictly positive", w[i]),
        )),
    }
}

impl WeightedLattice {
    pub fn new(u: Vec<f64>, phi: Vec<f64>, p: BaseNorm, quad: Vec<f64>) -> Result<Self> {
        if u.is_empty() {
            return Err(invalid("u", "dimension must be at least 1"));
        }
        check_dim(u.len(), phi.len())?;
        check_dim(u.len(), quad.len())?;
        check_positive("u", &u)?;
        check_positive("phi", &phi)?;
        check_positive("quad", &quad)?;
        Ok(Self { u, phi, p, quad })
    }

    /// `u = phi = quad = 1` with the given base exponent.
    pub fn uniform(n: usize, p: BaseNorm) -> Result<Self> {
        Self::new(vec![1.0; n], vec![1.0; n], p, vec![1.0; n])
    }

    pub fn with_weights(u: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let n = u.len();
        Self::new(u, phi, BaseNorm::L2, vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn p(&self) -> BaseNorm {
        self.p
    }

    pub fn quad(&self) -> &[f64] {
        &self.quad
    }

    pub fn gauge_norm(&self, f: &[f64]) -> Result<f64> {
        gauge_norm(f, &self.u)
    }

    pub fn al_norm(&self, f: &[f64]) -> Result<f64> {
        al_norm(f, &self.phi)
    }

    /// Weighted `l^p` norm `(sum_i quad_i |f_i|^p)^(1/p)`; `quad` is ignored for `p = inf`.
    pub fn base_norm(&self, f: &[f64]) -> Result<f64> {
        check_dim(self.n(), f.len())?;
        Ok(Norm::Base.canonical(self).eval(f))
    }
}

/// `max_i |f_i| / w_i`, the gauge norm of the ideal generated by `w`.
pub fn gauge_norm(f: &[f64], w: &[f64]) -> Result<f64> {
    check_dim(w.len(), f.len())?;
    Ok(f.iter().zip(w).map(|(x, w)| x.abs() / w).fold(0.0, f64::max))
}

/// `sum_i w_i |f_i|`, additive on the positive cone.
pub fn al_norm(f: &[f64], w: &[f64]) -> Result<f64> {
    check_dim(w.len(), f.len())?;
    Ok(f.iter().zip(w).map(|(x, w)| x.abs() * w).sum())
}

/// Largest `eps` with `f >= eps * w`, together with the index attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub value: f64,
    pub attained_index: usize,
}

impl Margin {
    /// `f >> 0` relative to the weight.
    pub fn is_strongly_positive(&self) -> bool {
        self.value > 0.0
    }
}

pub fn strong_positivity_margin(f: &[f64], w: &[f64]) -> Result<Margin> {
    check_dim(w.len(), f.len())?;
    if f.is_empty() {
        return Err(invalid("f", "empty vector has no margin"));
    }
    check_positive("w", w)?;
    let mut best = Margin {
        value: f64::INFINITY,
        attained_index: 0,
    };
    for (i, (x, w)) in f.iter().zip(w).enumerate() {
        let r = x / w;
        if r < best.value {
            best = Margin {
                value: r,
                attained_index: i,
            };
        }
    }
    Ok(best)
}

/// A norm on `R^n`, either one of the lattice's own norms or a gauge/AL norm
/// for an arbitrary strictly positive weight.
#[derive(Debug, Clone, PartialEq)]
pub enum Norm {
    /// The lattice base norm.
    Base,
    /// The dual of the base norm under the pairing `<g, f> = sum_i g_i f_i`.
    BaseDual,
    /// `max_i |f_i| / w_i`.
    Gauge(Vec<f64>),
    /// `sum_i w_i |f_i|`.
    Al(Vec<f64>),
}

impl Norm {
    pub fn gauge_u(l: &WeightedLattice) -> Self {
        Norm::Gauge(l.u.clone())
    }

    pub fn al_phi(l: &WeightedLattice) -> Self {
        Norm::Al(l.phi.clone())
    }

    fn label(&self) -> &'static str {
        match self {
            Norm::Base => "base",
            Norm::BaseDual => "base-dual",
            Norm::Gauge(_) => "gauge",
            Norm::Al(_) => "al",
        }
    }

    fn canonical(&self, l: &WeightedLattice) -> Canon {
        match self {
            Norm::Base => match l.p {
                BaseNorm::L1 => Canon::Al(l.quad.clone()),
                BaseNorm::L2 => Canon::L2(l.quad.clone()),
                BaseNorm::Inf => Canon::Gauge(vec![1.0; l.n()]),
            },
            Norm::BaseDual => match l.p {
                BaseNorm::L1 => Canon::Gauge(l.quad.clone()),
                BaseNorm::L2 => Canon::L2(l.quad.iter().map(|q| 1.0 / q).collect()),
                BaseNorm::Inf => Canon::Al(vec![1.0; l.n()]),
            },
            Norm::Gauge(w) => Canon::Gauge(w.clone()),
            Norm::Al(w) => Canon::Al(w.clone()),
        }
    }

    pub fn eval(&self, f: &[f64], l: &WeightedLattice) -> Result<f64> {
        check_dim(l.n(), f.len())?;
        let c = self.canonical(l);
        check_dim(l.n(), c.weights().len())?;
        Ok(c.eval(f))
    }
}

/// Every norm used here is one of three weighted families, closed under duality.
#[derive(Debug, Clone)]
enum Canon {
    Gauge(Vec<f64>),
    Al(Vec<f64>),
    /// `sqrt(sum_i w_i f_i^2)`
    L2(Vec<f64>),
}

impl Canon {
    fn weights(&self) -> &[f64] {
        match self {
            Canon::Gauge(w) | Canon::Al(w) | Canon::L2(w) => w,
        }
    }

    fn eval(&self, f: &[f64]) -> f64 {
        match self {
            Canon::Gauge(w) => f.iter().zip(w).map(|(x, w)| x.abs() / w).fold(0.0, f64::max),
            Canon::Al(w) => f.iter().zip(w).map(|(x, w)| x.abs() * w).sum(),
            Canon::L2(w) => f.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>().sqrt(),
        }
    }

    fn dual(&self) -> Canon {
        match self {
            Canon::Gauge(w) => Canon::Al(w.clone()),
            Canon::Al(w) => Canon::Gauge(w.clone()),
            Canon::L2(w) => Canon::L2(w.iter().map(|x| 1.0 / x).collect()),
        }
    }

    /// `sup_g ||g||_self / ||g||_inf`
    fn inf_embedding(&self) -> f64 {
        match self {
            Canon::Gauge(w) => 1.0 / w.iter().cloned().fold(f64::INFINITY, f64::min),
            Canon::Al(w) => w.iter().sum(),
            Canon::L2(w) => w.iter().sum::<f64>().sqrt(),
        }
    }
}

/// Operator norm value and whether it is exact or a certified upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpNorm {
    pub value: f64,
    pub exact: bool,
}

/// Norm of `m` as a map from `(R^n, from)` to `(R^n, to)`.
///
/// Exact whenever the source is an AL norm (the unit ball is a cross-polytope,
/// so the supremum sits on a scaled coordinate vector), whenever the target is
/// a gauge norm (row-wise dual norms), or for weighted `l^2 -> l^2`. All other
/// pairs return the upper bound obtained by factoring through `l^inf`, with
/// `exact = false`.
pub fn op_norm(m: &DMatrix<f64>, from: &Norm, to: &Norm, l: &WeightedLattice) -> Result<OpNorm> {
    let n = l.n();
    check_dim(n, m.nrows())?;
    check_dim(n, m.ncols())?;
    let src = from.canonical(l);
    let dst = to.canonical(l);
    for (norm, c) in [(from, &src), (to, &dst)] {
        if c.weights().len() != n {
            return Err(invalid(
                "norm",
                format!("{} weight has length {}, expected {n}", norm.label(), c.weights().len()),
            ));
        }
    }
    if let Canon::Al(w) = &src {
        let mut best: f64 = 0.0;
        let mut col = vec![0.0; n];
        for (j, wj) in w.iter().enumerate() {
            col.iter_mut().zip(m.column(j).iter()).for_each(|(c, x)| *c = *x);
            best = best.max(dst.eval(&col) / wj);
        }
        return Ok(OpNorm { value: best, exact: true });
    }
    if let Canon::Gauge(w) = &dst {
        Ok(OpNorm {
            value: row_dual_max(m, &src.dual(), w),
            exact: true,
        })
    } else if let (Canon::L2(a), Canon::L2(b)) = (&src, &dst) {
        let scaled = DMatrix::from_fn(n, n, |i, j| b[i].sqrt() * m[(i, j)] / a[j].sqrt());
        let sv = scaled.singular_values();
        Ok(OpNorm {
            value: sv.iter().cloned().fold(0.0, f64::max),
            exact: true,
        })
    } else {
        let to_inf = row_dual_max(m, &src.dual(), &vec![1.0; n]);
        Ok(OpNorm {
            value: to_inf * dst.inf_embedding(),
            exact: false,
        })
    }
}

fn row_dual_max(m: &DMatrix<f64>, dual: &Canon, w: &[f64]) -> f64 {
    let n = m.ncols();
    let mut row = vec![0.0; n];
    let mut best: f64 = 0.0;
    for (i, wi) in w.iter().enumerate() {
        row.iter_mut().zip(m.row(i).iter()).for_each(|(r, x)| *r = *x);
        best = best.max(dual.eval(&row) / wi);
    }
    best
}

/// `max_{ij} |m_ij| / (v_i psi_j)`: the norm of `m` from `al(psi)` to `gauge(v)`.
pub fn al_to_gauge_norm(m: &DMatrix<f64>, psi: &[f64], v: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs() / (v[i] * psi[j]));
        }
    }
    best
}

/// `min_{ij} m_ij / (v_i psi_j)`: the largest `eps` with `m >= eps * v psi^T`.
pub fn rank_one_margin(m: &DMatrix<f64>, v: &[f64], psi: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.min(m[(i, j)] / (v[i] * psi[j]));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub const DEFAULT_DUALITY_SLACK: f64 = 1e-10;

/// Compares `||T||_{al(phi) -> base}` with `||T^T||_{base* -> gauge(phi)}`.
pub fn duality_inequality_check(t: &DMatrix<f64>, l: &WeightedLattice, slack: f64) -> Result<DualityCheck> {
    let lhs = op_norm(t, &Norm::al_phi(l), &Norm::Base, l)?.value;
    let rhs = op_norm(&t.transpose(), &Norm::BaseDual, &Norm::Gauge(l.phi.clone()), l)?.value;
    Ok(DualityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(u: &[f64], phi: &[f64]) -> WeightedLattice {
        WeightedLattice::with_weights(u.to_vec(), phi.to_vec()).unwrap()
    }

    #[test]
    fn gauge_norm_examples() {
        let l = lat(&[1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(l.gauge_norm(&[2.0, -3.0]).unwrap(), 3.0);
        assert_eq!(l.gauge_norm(&[0.0, 0.0]).unwrap(), 0.0);
        let u = [0.3, 2.5, 1.0];
        assert_eq!(gauge_norm(&u, &u).unwrap(), 1.0);
    }

    #[test]
    fn al_norm_examples() {
        assert_eq!(al_norm(&[2.0, -3.0], &[1.0, 1.0]).unwrap(), 5.0);
        assert_eq!(al_norm(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(al_norm(&[4.0, 1.0], &[0.5, 2.0]).unwrap(), 4.0);
    }

    #[test]
    fn margin_examples() {
        let w = [1.5, 0.2];
        assert_eq!(strong_positivity_margin(&w, &w).unwrap().value, 1.0);
        let m = strong_positivity_margin(&[1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(m.value, -1.0);
        assert_eq!(m.attained_index, 1);
        assert!(!m.is_strongly_positive());
        assert_eq!(strong_positivity_margin(&[2.0, 4.0], &[1.0, 2.0]).unwrap().value, 2.0);
    }

    #[test]
    fn dimension_errors() {
        assert!(gauge_norm(&[1.0], &[1.0, 2.0]).is_err());
        assert!(al_norm(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(strong_positivity_margin(&[1.0], &[1.0, 1.0]).is_err());
        let l = lat(&[1.0, 1.0], &[1.0, 1.0]);
        assert!(op_norm(&DMatrix::zeros(3, 3), &Norm::Base, &Norm::Base, &l).is_err());
        assert!(op_norm(&DMatrix::zeros(2, 2), &Norm::Gauge(vec![1.0]), &Norm::Base, &l).is_err());
    }

    #[test]
    fn lattice_rejects_nonpositive_weights() {
        assert!(WeightedLattice::with_weights(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(WeightedLattice::with_weights(vec![1.0, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(WeightedLattice::new(vec![], vec![], BaseNorm::L1, vec![]).is_err());
        assert!(WeightedLattice::new(vec![1.0], vec![1.0], BaseNorm::L1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn op_norm_examples() {
        let v = [0.7, 1.3];
        let psi = [2.0, 0.4];
        let l = lat(&[1.0, 1.0], &[1.0, 1.0]);
        let rank_one = DMatrix::from_fn(2, 2, |i, j| v[i] * psi[j]);
        let r = op_norm(&rank_one, &Norm::Al(psi.to_vec()), &Norm::Gauge(v.to_vec()), &l).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15 && r.exact);
        let zero = DMatrix::zeros(2, 2);
        assert_eq!(op_norm(&zero, &Norm::Al(psi.to_vec()), &Norm::Gauge(v.to_vec()), &l).unwrap().value, 0.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        let ones = vec![1.0, 1.0];
        assert_eq!(op_norm(&d, &Norm::Al(ones.clone()), &Norm::Gauge(ones), &l).unwrap().value, 3.0);
        assert_eq!(al_to_gauge_norm(&d, &[1.0, 1.0], &[1.0, 1.0]), 3.0);
    }

    #[test]
    fn base_to_gauge_closed_forms() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 0.5]);
        let u = vec![2.0, 1.0];
        let inf = WeightedLattice::new(u.clone(), vec![1.0; 2], BaseNorm::Inf, vec![1.0; 2]).unwrap();
        // max(3/2, 3.5/1)
        assert_eq!(op_norm(&m, &Norm::Base, &Norm::gauge_u(&inf), &inf).unwrap().value, 3.5);
        let l1 = WeightedLattice::new(u.clone(), vec![1.0; 2], BaseNorm::L1, vec![1.0; 2]).unwrap();
        assert_eq!(op_norm(&m, &Norm::Base, &Norm::gauge_u(&l1), &l1).unwrap().value, 3.0);
        let l2 = WeightedLattice::new(u, vec![1.0; 2], BaseNorm::L2, vec![1.0; 2]).unwrap();
        let expect = (9.25f64).sqrt();
        assert!((op_norm(&m, &Norm::Base, &Norm::gauge_u(&l2), &l2).unwrap().value - expect).abs() < 1e-14);
    }

    #[test]
    fn inexact_pairs_are_flagged() {
        let l = WeightedLattice::uniform(2, BaseNorm::Inf).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let r = op_norm(&m, &Norm::Gauge(vec![1.0; 2]), &Norm::Al(vec![1.0; 2]), &l).unwrap();
        assert!(!r.exact);
        // the true inf -> 1 norm of this matrix is 2 (at f = (1, 0)); the bound is 2 * 2
        assert!(r.value >= 2.0);
    }

    #[test]
    fn duality_examples() {
        let l = WeightedLattice::uniform(3, BaseNorm::L2).unwrap();
        let z = duality_inequality_check(&DMatrix::zeros(3, 3), &l, DEFAULT_DUALITY_SLACK).unwrap();
        assert_eq!((z.lhs, z.rhs, z.holds), (0.0, 0.0, true));
        let l1 = WeightedLattice::uniform(3, BaseNorm::L1).unwrap();
        let id = duality_inequality_check(&DMatrix::identity(3, 3), &l1, DEFAULT_DUALITY_SLACK).unwrap();
        assert_eq!((id.lhs, id.rhs, id.holds), (1.0, 1.0, true));
    }
}
