use evpos::analyzer::{check_criteria, self_adjoint_path, uniform_t0, Tolerances};
use evpos::grid::GridSpec;
use evpos::lattice::{al_norm, duality_inequality_check, gauge_norm, BaseNorm, WeightedLattice};
use evpos::models::nonlocal::{nonlocal_matrix, reversed, weighted_adjoint};
use evpos::models::synthetic::certified;
use evpos::models::{build_clamped_beam, build_delay, dtn_symbol, BeamSpec, DelaySpec, NonlocalSpec};
use evpos::spectral::{expm, Generator};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn base_norm() -> impl Strategy<Value = BaseNorm> {
    prop_oneof![Just(BaseNorm::L1), Just(BaseNorm::L2), Just(BaseNorm::Inf)]
}

/// A square matrix with its size and three positive weight vectors.
fn weighted_case() -> impl Strategy<Value = (DMatrix<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..8).prop_flat_map(|n| {
        (
            vec(-2.0..2.0f64, n * n).prop_map(move |e| DMatrix::from_vec(n, n, e)),
            vec(0.05..4.0f64, n),
            vec(0.05..4.0f64, n),
            vec(0.05..4.0f64, n),
        )
    })
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn duality_inequality_holds((t, u, phi, quad) in weighted_case(), p in base_norm()) {
        let l = WeightedLattice::new(u, phi, p, quad).unwrap();
        let d = duality_inequality_check(&t, &l, 1e-10).unwrap();
        prop_assert!(d.holds, "{} > {}", d.lhs, d.rhs);
    }

    #[test]
    fn gauge_and_al_norms_pair((_t, w, f, g) in weighted_case(), sign in vec(any::<bool>(), 8)) {
        let f: Vec<f64> = f.iter().zip(&sign).map(|(x, s)| if *s { -x } else { *x }).collect();
        // |<g, f>| <= ||g||_{al(w)} ||f||_{gauge(w)}
        let pairing: f64 = f.iter().zip(&g).map(|(a, b)| a * b).sum();
        prop_assert!(pairing.abs() <= al_norm(&g, &w).unwrap() * gauge_norm(&f, &w).unwrap() * (1.0 + 1e-12));
        // The gauge norm of the weight itself is 1; the AL norm is additive on the cone.
        prop_assert!((gauge_norm(&w, &w).unwrap() - 1.0).abs() < 1e-15);
        let sum: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a + b).collect();
        let lhs = al_norm(&sum, &w).unwrap();
        let rhs = al_norm(&w, &w).unwrap() + al_norm(&g, &w).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn exponential_is_a_semigroup((a, _u, _p, _q) in weighted_case(), s in 0.0..1.5f64, t in 0.0..1.5f64) {
        let g = Generator::new(a, "random").unwrap();
        let lhs = expm(&g, s + t).unwrap();
        let rhs = expm(&g, s).unwrap() * expm(&g, t).unwrap();
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-9 * (1.0 + lhs.amax()));
    }

    #[test]
    fn certified_samples_pass_and_bound_holds(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = certified(n, &mut rng);
        let g = Generator::new(c.a.clone(), "certified").unwrap();
        let l = WeightedLattice::uniform(n, BaseNorm::L2).unwrap();
        let cert = check_criteria(&g, &l, &Tolerances::default()).unwrap();
        prop_assert!(cert.passed(), "{}", cert.verdict.describe());
        prop_assert!((cert.spectral_bound - c.s).abs() < 1e-8);
        let r = uniform_t0(&g, &cert, &l, 0.5, &GridSpec::for_gap(cert.dominance_gap)).unwrap();
        prop_assert!(r.margin_holds);
        prop_assert_eq!(r.implication_holds, Some(true));
    }

    #[test]
    fn c1d1_is_invariant_under_diagonal_similarity(seed in any::<u64>(), n in 2usize..7, d in vec(0.2..5.0f64, 7)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = certified(n, &mut rng);
        let l = WeightedLattice::with_weights(vec![1.0; n], vec![1.0; n]).unwrap();
        let cert = check_criteria(&Generator::new(c.a.clone(), "a").unwrap(), &l, &Tolerances::default()).unwrap();
        // D A D^-1 on the lattice with u -> D u, phi -> D^-1 phi.
        let dd = &d[..n];
        let scaled = DMatrix::from_fn(n, n, |i, j| dd[i] * c.a[(i, j)] / dd[j]);
        let l2 = WeightedLattice::with_weights(dd.to_vec(), dd.iter().map(|x| 1.0 / x).collect()).unwrap();
        let cert2 = check_criteria(&Generator::new(scaled, "dad").unwrap(), &l2, &Tolerances::default()).unwrap();
        prop_assert!(cert.passed() && cert2.passed());
        let (a, b) = (cert.c1d1().unwrap(), cert2.c1d1().unwrap());
        prop_assert!((a - b).abs() <= 1e-7 * a, "{a} vs {b}");
    }

    #[test]
    fn self_adjoint_and_general_paths_agree(n in 2usize..9, e in vec(-1.0..1.0f64, 81), diag in vec(-2.0..2.0f64, 9)) {
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { e[i.min(j) * 9 + i.max(j)] });
        let eig = SymmetricEigen::new(a.clone());
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        let k = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(k);
        let sign = v.sum().signum();
        let min_v = v.iter().map(|x| x * sign).fold(f64::INFINITY, f64::min);
        // Skip cases sitting on a decision boundary.
        prop_assume!(ev[0] - ev[1] > 1e-3 && min_v.abs() > 1e-4);
        let g = Generator::symmetric(a, "sym").unwrap();
        let l = WeightedLattice::uniform(n, BaseNorm::L2).unwrap();
        let tol = Tolerances::default();
        let general = check_criteria(&g, &l, &tol).unwrap();
        let sa = self_adjoint_path(&g, &l, &tol).unwrap();
        prop_assert_eq!(general.passed(), sa.passed());
        prop_assert_eq!(general.passed(), min_v > 0.0);
        prop_assert!((general.spectral_bound - sa.spectral_bound).abs() < 1e-10);
    }

    #[test]
    fn harmonic_symbol_is_monotone(lambda in 0.0..30.0f64) {
        let mut prev = f64::NEG_INFINITY;
        for n in 0..40i64 {
            let d = dtn_symbol(n, lambda).unwrap();
            prop_assert!(d > prev);
            prop_assert_eq!(d, dtn_symbol(-n, lambda).unwrap());
            prev = d;
        }
    }

    #[test]
    fn neumann_rows_sum_to_zero(m in 4usize..80) {
        let a = nonlocal_matrix(&NonlocalSpec::new([[0.0, 0.0], [0.0, 0.0]], m)).unwrap();
        for i in 0..a.nrows() {
            prop_assert!(a.row(i).sum().abs() <= 1e-9 * a.amax());
        }
    }

    #[test]
    fn transposed_boundary_is_weighted_adjoint(b in vec(-2.0..2.0f64, 4), m in 4usize..40, beta in -2.0..2.0f64) {
        let bc = [[b[0], b[1]], [b[2], b[3]]];
        let spec = NonlocalSpec::new(bc, m);
        let a = nonlocal_matrix(&spec).unwrap();
        let a_t = nonlocal_matrix(&NonlocalSpec::new([[b[0], b[2]], [b[1], b[3]]], m)).unwrap();
        prop_assert!(max_abs_diff(&weighted_adjoint(&a, &spec.quadrature()), &a_t) <= 1e-12 * a.amax());
        let th = nonlocal_matrix(&NonlocalSpec::new([[0.0, beta], [0.0, 0.0]], m)).unwrap();
        let th_t = nonlocal_matrix(&NonlocalSpec::new([[0.0, 0.0], [beta, 0.0]], m)).unwrap();
        prop_assert_eq!(reversed(&th), th_t);
    }

    #[test]
    fn beam_is_negative_definite(m in 8usize..60) {
        let op = build_clamped_beam(&BeamSpec { m }).unwrap();
        let ev = SymmetricEigen::new(op.generator.matrix().clone()).eigenvalues;
        prop_assert!(ev.max() < 0.0);
    }

    #[test]
    fn delay_constants_are_in_the_kernel(c in 0.01..3.0f64, half in 4usize..40) {
        let op = build_delay(&DelaySpec { c, m: 2 * half }).unwrap();
        let a = op.generator.matrix();
        let r = a * DVector::from_element(a.nrows(), 1.0);
        prop_assert!(r.amax() <= 1e-12 * op.generator.norm2());
    }
}
