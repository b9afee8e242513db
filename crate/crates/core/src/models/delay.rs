//! The delay equation
//! `y'(t) = c (int_{t-2}^{t-1} y - int_{t-1}^{t} y + y(t-2) - y(t))`
//! as a semigroup on states `(x, f)` with `f` a function on `[-2, 0]`,
//! `f(0) = x`, generator `A(x, f) = (<Phi, f>, f')` and
//! `<Phi, f> = c (int_{-2}^{-1} f - int_{-1}^{0} f + f(-2) - f(0))`.
//!
//! Spectral values are the roots of `lambda = <Phi, e^{lambda .}>`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DiscretizedOperator, Metadata};
use crate::error::{invalid, Error, Result};
use crate::lattice::{BaseNorm, WeightedLattice};
use crate::spectral::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySpec {
    pub c: f64,
    /// Number of grid intervals on `[-2, 0]`; the state has `m + 1` samples.
    pub m: usize,
}

impl DelaySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("c", "must be positive"));
        }
        if self.m < 8 || self.m % 2 == 1 {
            return Err(invalid("m", "need an even number of intervals, at least 8"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        2.0 / self.m as f64
    }

    /// `s_j = -2 + j h`, `j = 0..=m`; the last sample is `x = f(0)`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m)
            .map(|j| if j == self.m { 0.0 } else { -2.0 + j as f64 * self.h() })
            .collect()
    }
}

/// Piecewise linear dual profile: `3 + s` on `[-2, -1]`, `1 - s` on `(-1, 0]`.
pub fn dual_profile(s: f64) -> f64 {
    if s <= -1.0 {
        3.0 + s
    } else {
        1.0 - s
    }
}

/// Upwind transport rows `(f_{j+1} - f_j) / h` for `j < m` and the row
/// `c (Q_{[-2,-1]} f - Q_{[-1,0]} f + f_0 - f_m)` with trapezoid `Q`.
///
/// Lattice: `u = 1`; `phi_j = h v(s_j)` for `j < m` and `phi_m = 1`,
/// with `v` the dual profile, and quadrature `(h, ..., h, 1)`.
pub fn build_delay(spec: &DelaySpec) -> Result<DiscretizedOperator> {
    spec.validate()?;
    let m = spec.m;
    let n = m + 1;
    let h = spec.h();
    let mut a = DMatrix::zeros(n, n);
    for j in 0..m {
        a[(j, j)] = -1.0 / h;
        a[(j, j + 1)] = 1.0 / h;
    }
    let half = m / 2;
    let trap = |j: usize, lo: usize, hi: usize| -> f64 {
        if j < lo || j > hi {
            0.0
        } else if j == lo || j == hi {
            0.5 * h
        } else {
            h
        }
    };
    for j in 0..n {
        a[(m, j)] = spec.c * (trap(j, 0, half) - trap(j, half, m));
    }
    a[(m, 0)] += spec.c;
    a[(m, m)] -= spec.c;
    let nodes = spec.nodes();
    let mut quad = vec![h; n];
    quad[m] = 1.0;
    let phi: Vec<f64> = (0..n).map(|j| if j == m { 1.0 } else { h * dual_profile(nodes[j]) }).collect();
    let generator = Generator::new(a, format!("delay(c={}, m={m})", spec.c))?;
    let lattice = WeightedLattice::new(vec![1.0; n], phi, BaseNorm::L1, quad)?;
    Ok(DiscretizedOperator {
        generator,
        lattice,
        metadata: Metadata::Delay { c: spec.c, nodes },
    })
}

/// `(1 - e^{-z}) / z`, with its Taylor series near zero.
fn q(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) - z / 2.0 + z * z / 6.0 - z * z * z / 24.0
    } else {
        (Complex64::new(1.0, 0.0) - (-z).exp()) / z
    }
}

/// `lambda - <Phi, e^{lambda .}>`
/// `= lambda - c ((e^{-lambda} - e^{-2 lambda}) / lambda - (1 - e^{-lambda}) / lambda + e^{-2 lambda} - 1)`.
pub fn delay_char_residual(lambda: Complex64, c: f64) -> Complex64 {
    let e1 = (-lambda).exp();
    let e2 = (-2.0 * lambda).exp();
    let ql = q(lambda);
    lambda - c * (e1 * ql - ql + e2 - 1.0)
}

/// Closed rectangle `[re_min, re_max] x [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    /// `[-0.1, 1] x [-10, 10]`.
    pub fn default_for_delay() -> Self {
        Self::new(-0.1, 1.0, -10.0, 10.0)
    }

    fn contains(&self, z: Complex64, pad: f64) -> bool {
        z.re >= self.re_min - pad && z.re <= self.re_max + pad && z.im >= self.im_min - pad && z.im <= self.im_max + pad
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn width(&self) -> f64 {
        (self.re_max - self.re_min).max(self.im_max - self.im_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceScan {
    pub c: f64,
    pub window: Window,
    /// Number of roots inside the window by the argument principle.
    pub count: usize,
    /// Located roots, sorted by decreasing real part.
    pub roots: Vec<Complex64>,
    /// Every located root with `Re >= 0` has `|Im| <= 4c`.
    pub imag_bound_holds: bool,
    /// Window perturbations needed because a root sat on the boundary.
    pub retries: usize,
}

impl DominanceScan {
    /// Whether the only root in the window is `lambda = 0`.
    pub fn zero_is_only_root(&self) -> bool {
        self.count == 1 && self.roots.len() == 1 && self.roots[0].norm() < 1e-8
    }
}

const MAX_BISECT_DEPTH: usize = 40;

/// Winding number of `f` along the segment list; errors when `f` nearly
/// vanishes on the contour.
fn winding<F: Fn(Complex64) -> Complex64>(f: &F, w: &Window) -> Result<i64> {
    let scale = w.width().max(1.0);
    let corners = w.corners();
    let mut total = 0.0;
    for k in 0..4 {
        let (z0, z1) = (corners[k], corners[(k + 1) % 4]);
        let pieces = 64;
        for p in 0..pieces {
            let a = z0 + (z1 - z0) * (p as f64 / pieces as f64);
            let b = z0 + (z1 - z0) * ((p + 1) as f64 / pieces as f64);
            total += arg_change(f, a, b, f(a), f(b), scale, 0)?;
        }
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.1 {
        return Err(Error::Winding {
            reason: format!("non-integer winding {turns}"),
        });
    }
    Ok(rounded as i64)
}

fn arg_change<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    scale: f64,
    depth: usize,
) -> Result<f64> {
    let tiny = 1e-10 * scale;
    if fa.norm() < tiny || fb.norm() < tiny {
        return Err(Error::Winding {
            reason: format!("characteristic function vanishes near {a} on the boundary"),
        });
    }
    let d = (fb / fa).arg();
    if d.abs() <= std::f64::consts::FRAC_PI_4 {
        return Ok(d);
    }
    if depth >= MAX_BISECT_DEPTH {
        return Err(Error::Winding {
            reason: format!("argument not resolved between {a} and {b}"),
        });
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    Ok(arg_change(f, a, mid, fa, fm, scale, depth + 1)? + arg_change(f, mid, b, fm, fb, scale, depth + 1)?)
}

fn newton<F: Fn(Complex64) -> Complex64>(f: &F, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..60 {
        let fz = f(z);
        let e = 1e-7 * (1.0 + z.norm());
        let df = (f(z + e) - f(z - e)) / (2.0 * e);
        if df.norm() == 0.0 {
            return None;
        }
        let step = fz / df;
        z -= step;
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    (f(z).norm() < 1e-12).then_some(z)
}

/// Splits `w` and counts roots in each half, shifting the cut off any root.
fn locate<F: Fn(Complex64) -> Complex64>(f: &F, w: Window, count: i64, out: &mut Vec<Complex64>) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    if count == 1 && w.width() < 1e-2 {
        let center = Complex64::new(0.5 * (w.re_min + w.re_max), 0.5 * (w.im_min + w.im_max));
        if let Some(z) = newton(f, center).filter(|z| w.contains(*z, 1e-9)) {
            out.push(z);
            return Ok(());
        }
    }
    if w.width() < 1e-12 {
        // multiple or unresolved root: report the centre with its multiplicity
        let center = Complex64::new(0.5 * (w.re_min + w.re_max), 0.5 * (w.im_min + w.im_max));
        for _ in 0..count {
            out.push(center);
        }
        return Ok(());
    }
    let split_re = w.re_max - w.re_min >= w.im_max - w.im_min;
    let mut last_err = None;
    for attempt in 0..8 {
        let frac = 0.5 + 0.0173 * attempt as f64;
        let (lo, hi) = if split_re {
            let cut = w.re_min + frac * (w.re_max - w.re_min);
            (Window { re_max: cut, ..w }, Window { re_min: cut, ..w })
        } else {
            let cut = w.im_min + frac * (w.im_max - w.im_min);
            (Window { im_max: cut, ..w }, Window { im_min: cut, ..w })
        };
        match (winding(f, &lo), winding(f, &hi)) {
            (Ok(a), Ok(b)) if a + b == count && a >= 0 && b >= 0 => {
                locate(f, lo, a, out)?;
                return locate(f, hi, b, out);
            }
            (Err(e), _) | (_, Err(e)) => last_err = Some(e),
            _ => {
                last_err = Some(Error::Winding {
                    reason: "subdivision counts do not add up".into(),
                })
            }
        }
    }
    Err(last_err.unwrap())
}

/// Characteristic roots of the delay equation inside `window` (which must
/// contain 0), with the a-priori bound `|Im| <= 4c` for roots with `Re >= 0`.
pub fn delay_dominance_scan(c: f64, window: Window) -> Result<DominanceScan> {
    if !(window.re_min < 0.0 && window.re_max > 0.0 && window.im_min < 0.0 && window.im_max > 0.0) {
        return Err(invalid("window", "must contain 0 in its interior"));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(invalid("c", "must be nonnegative"));
    }
    let f = |z: Complex64| delay_char_residual(z, c);
    let mut w = window;
    let mut retries = 0;
    let count = loop {
        match winding(&f, &w) {
            Ok(k) if k >= 0 => break k,
            Ok(k) => {
                return Err(Error::Winding {
                    reason: format!("negative winding {k} for an entire function"),
                })
            }
            Err(e) if retries >= 5 => return Err(e),
            Err(_) => {
                retries += 1;
                let d = 1e-3 * retries as f64;
                w = Window::new(window.re_min - d, window.re_max + d, window.im_min - d, window.im_max + d);
            }
        }
    };
    let mut roots = Vec::new();
    locate(&f, w, count, &mut roots)?;
    for z in roots.iter_mut() {
        if z.im.abs() < 1e-12 {
            z.im = 0.0;
        }
        if z.norm() < 1e-13 {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let imag_bound_holds = roots.iter().filter(|z| z.re >= 0.0).all(|z| z.im.abs() <= 4.0 * c + 1e-9);
    Ok(DominanceScan {
        c,
        window: w,
        count: count as usize,
        roots,
        imag_bound_holds,
        retries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn residual_examples() {
        assert_eq!(delay_char_residual(Complex64::new(0.0, 0.0), 0.7), Complex64::new(0.0, 0.0));
        let r = delay_char_residual(Complex64::new(0.0, PI), PI / 16.0);
        assert!((r - Complex64::new(0.0, PI - 0.25)).norm() < 1e-14);
        let big = delay_char_residual(Complex64::new(1e6, 0.0), 0.5);
        assert!((big.re - 1e6 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn series_branch_is_continuous() {
        for z in [Complex64::new(0.99e-4, 0.0), Complex64::new(0.0, 1.01e-4)] {
            let a = q(z);
            let b = (Complex64::new(1.0, 0.0) - (-z).exp()) / z;
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn ones_is_exact_null_vector() {
        let op = build_delay(&DelaySpec { c: PI / 16.0, m: 40 }).unwrap();
        let a = op.generator.matrix();
        let r = a * nalgebra::DVector::from_element(a.nrows(), 1.0);
        assert!(r.amax() <= 1e-12 * op.generator.norm2());
        // transport rows cancel exactly
        assert!(r.rows(0, a.nrows() - 1).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn scan_c_zero() {
        let s = delay_dominance_scan(0.0, Window::default_for_delay()).unwrap();
        assert_eq!(s.count, 1);
        assert_eq!(s.roots, vec![Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn scan_small_c() {
        let s = delay_dominance_scan(PI / 16.0, Window::default_for_delay()).unwrap();
        assert!(s.zero_is_only_root(), "{s:?}");
        assert!(s.imag_bound_holds);
    }

    #[test]
    fn roots_satisfy_the_equation() {
        let s = delay_dominance_scan(2.0, Window::default_for_delay()).unwrap();
        assert!(s.count >= 3);
        for z in &s.roots {
            assert!(delay_char_residual(*z, 2.0).norm() < 1e-10);
        }
    }

    #[test]
    fn validation() {
        assert!(build_delay(&DelaySpec { c: 0.0, m: 40 }).is_err());
        assert!(build_delay(&DelaySpec { c: 1.0, m: 41 }).is_err());
        assert!(delay_dominance_scan(1.0, Window::new(0.1, 1.0, -1.0, 1.0)).is_err());
    }
}
