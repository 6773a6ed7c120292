mod common;

use common::*;
use proptest::prelude::*;
use qfim_core::linalg::*;
use qfim_core::{BasisSet, QfimError};
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vec_mat_roundtrip_is_exact(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n, n);
        prop_assert_eq!(&mat(&vec(&a), n).unwrap(), &a);
        let v = random_ket(&mut r, n * n);
        prop_assert_eq!(vec(&mat(&v, n).unwrap()), v);
    }

    #[test]
    fn block_vectorization_identity(seed in any::<u64>(), n in 2usize..6, split in 0usize..6) {
        let mut r = rng(seed);
        let s = split.min(n);
        let p = BlockPartition::new(s, s);
        let (a, b, cm) = (random_matrix(&mut r, n, n), random_matrix(&mut r, n, n), random_matrix(&mut r, n, n));
        let lhs = vecb(&(&(&a * &b) * &cm), p).unwrap();
        let ts = tracy_singh(&cm.transpose(), p.transposed(), &a, p).unwrap();
        let rhs = ts.mul_vec(&vecb(&b, p).unwrap()).unwrap();
        let scale = lhs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (x, y) in lhs.iter().zip(&rhs) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
        prop_assert_eq!(matb(&vecb(&b, p).unwrap(), n, n, p).unwrap(), b);
    }

    #[test]
    fn tracy_singh_trivial_partitions_bit_match_kron(seed in any::<u64>(), ra in 1usize..4, ca in 1usize..4, rb in 1usize..4, cb in 1usize..4) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, ra, ca);
        let b = random_matrix(&mut r, rb, cb);
        let ts = tracy_singh(&a, BlockPartition::trivial(ra, ca), &b, BlockPartition::trivial(rb, cb)).unwrap();
        prop_assert_eq!(ts, kron(&a, &b));
    }

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, n);
        let e = eig_hermitian(&a).unwrap();
        let rec = &(&e.vectors * &CMatrix::real_diag(&e.values)) * &e.vectors.adjoint();
        prop_assert!(rec.max_abs_diff(&a) <= 1e-10 * a.max_abs());
        let vv = &e.vectors.adjoint() * &e.vectors;
        prop_assert!(vv.max_abs_diff(&CMatrix::identity(n)) <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn inverse_accuracy_up_to_dimension_64() {
    let mut r = rng(50);
    for n in [1, 2, 5, 16, 33, 64] {
        let a = &random_matrix(&mut r, n, n) + &CMatrix::identity(n).scale_real(2.0 * (n as f64).sqrt());
        let inv_a = inv(&a).unwrap();
        let defect = (&a * &inv_a.value).max_abs_diff(&CMatrix::identity(n));
        assert!(defect <= 1e-10 * inv_a.condition, "n={n}: {defect:e}");
        let rhs = random_ket(&mut r, n);
        let x = solve(&a, &rhs).unwrap();
        let ax = a.mul_vec(&x.value).unwrap();
        let res = ax.iter().zip(&rhs).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        let rn = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(res <= SOLVE_TOL * rn * x.condition * n as f64);
    }
}

#[test]
fn solve_reports_singular_systems() {
    let a = CMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
    assert!(matches!(solve(&a, &[c(1.0, 0.0), c(0.0, 0.0)]), Err(QfimError::SingularMatrix { .. })));
}

#[test]
fn orthogonal_extension_preserves_span_and_coordinates() {
    let mut r = rng(51);
    for _ in 0..50 {
        let dim = r.gen_range(3..=7);
        let s = r.gen_range(1..dim);
        let kets: Vec<Vec<C64>> = (0..s).map(|_| random_ket(&mut r, dim)).collect();
        let b = BasisSet::new(kets, s, 1e-10).unwrap();
        let e = r.gen_range(1..=dim - s);
        let mut new: Vec<Vec<C64>> = (0..e).map(|_| random_ket(&mut r, dim)).collect();
        // One ket inside the span of the support.
        let inside: Vec<C64> = (0..dim).map(|i| b.kets()[0][i] * c(0.3, -0.2) + b.kets()[s - 1][i]).collect();
        new.push(inside);
        let raw = b.extend(&new, 1e-10).unwrap();
        let orth = b.extend_orthogonal(&new, 1e-10).unwrap();
        assert_eq!(raw.basis.len(), orth.basis.len());
        assert_eq!(orth.dropped, vec![new.len() - 1]);
        let n = orth.basis.len();
        // Extension kets are orthonormal and orthogonal to the support.
        let g = orth.basis.gram();
        for i in s..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
        for (x, coords) in new.iter().zip(&orth.coords) {
            assert_eq!(coords.len(), n);
            let rec: Vec<C64> = (0..dim)
                .map(|i| (0..n).map(|k| orth.basis.kets()[k][i] * coords[k]).sum())
                .collect();
            let dev = rec.iter().zip(x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(dev <= 1e-12 * norm(x));
        }
    }
}

#[test]
fn duplicated_ket_reports_indices() {
    let mut r = rng(52);
    let k0 = random_ket(&mut r, 4);
    let k1 = random_ket(&mut r, 4);
    match BasisSet::new(vec![k0.clone(), k1, k0], 3, 1e-10) {
        Err(QfimError::RankDeficient { indices, smallest_sigma }) => {
            assert!(indices.contains(&0) && indices.contains(&2), "{indices:?}");
            assert!(smallest_sigma < 1e-10);
        }
        other => panic!("expected RankDeficient, got {other:?}"),
    }
}
