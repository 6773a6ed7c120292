mod common;

use common::*;
use qfim_core::linalg::{kron, mat, solve, vec, CMatrix, C64};
use qfim_core::sld::{lyapunov_residual, sld_nonortho_with_tol};
use qfim_core::{qfim, sld_nonortho, BasisSet, ParameterSlot, StateModel};
use rand::Rng;

fn unit(v: Vec<C64>) -> Vec<C64> {
    let n = qfim_core::linalg::norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

#[test]
fn pure_state_with_orthonormal_extension_gives_twice_drho() {
    let mut r = rng(1);
    let psi = unit(random_ket(&mut r, 4));
    let raw = random_ket(&mut r, 4);
    let ov = qfim_core::linalg::inner(&psi, &raw);
    let e = unit(raw.iter().zip(&psi).map(|(x, p)| x - ov * p).collect());

    let basis = BasisSet::new(vec![psi.clone()], 1, 1e-10).unwrap();
    let bm = basis.extend(&[e], 1e-10).unwrap().basis;
    let a = c(0.4, -0.7);
    let drho = CMatrix::from_rows(&[vec![c(0.0, 0.0), a], vec![a.conj(), c(0.0, 0.0)]]);
    let m = StateModel::new(
        basis,
        CMatrix::identity(1),
        vec![ParameterSlot {
            name: "t".into(),
            basis: bm,
            drho: drho.clone(),
        }],
    )
    .unwrap();

    let sol = sld_nonortho_with_tol(&m, 0, 1e-12).unwrap();
    assert!(sol.l.max_abs_diff(&drho.scale_real(2.0)) < 1e-14);
    let twice = drho.scale_real(2.0);
    let g = m.slot(0).unwrap().basis.gram().clone();
    let rho = m.rho().padded(2, 2);
    assert!((sol.residual - lyapunov_residual(&rho, &g, &drho, &twice)).abs() < 1e-15);
    let h = qfim(&m).unwrap().h[(0, 0)];
    assert!(rel_err(h, 4.0 * a.norm_sqr()) < 1e-12);
}

#[test]
fn pure_state_in_non_orthogonal_basis_matches_ket_formula() {
    let mut r = rng(2);
    for _ in 0..20 {
        let psi = unit(random_ket(&mut r, 5));
        let k = random_hermitian(&mut r, 5);
        let dpsi: Vec<C64> = k.mul_vec(&psi).unwrap().into_iter().map(|z| z * c(0.0, -1.0)).collect();
        let basis = BasisSet::new(vec![psi.clone()], 1, 1e-10).unwrap();
        let bm = basis.extend(&[dpsi.clone()], 1e-10).unwrap().basis;
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let drho = CMatrix::from_rows(&[vec![zero, one], vec![one, zero]]);
        let m = StateModel::new(
            basis,
            CMatrix::identity(1),
            vec![ParameterSlot {
                name: "t".into(),
                basis: bm,
                drho,
            }],
        )
        .unwrap();
        let rep = qfim(&m).unwrap();
        let expect = pure_state_qfi(&psi, &dpsi);
        assert!(rel_err(rep.h[(0, 0)], expect) < 1e-10, "{} vs {expect}", rep.h[(0, 0)]);
        assert!(rep.diagnostics.params[0].relative_residual < 1e-8);
    }
}

/// `2 mat((ρ̄ ⊗ I + I ⊗ ρ)⁻¹ vec ∂ρ)`, assembled directly.
fn sld_by_vectorization(rho: &CMatrix, drho: &CMatrix) -> CMatrix {
    let n = rho.rows();
    let id = CMatrix::identity(n);
    let big = &kron(&rho.conj(), &id) + &kron(&id, rho);
    let x = solve(&big, &vec(drho)).unwrap().value;
    mat(&x, n).unwrap().scale_real(2.0)
}

#[test]
fn orthonormal_full_support_matches_vectorized_solution() {
    let mut r = rng(3);
    for n in 2..=5 {
        let basis = BasisSet::standard(n);
        let rho = random_rho(&mut r, basis.gram());
        let drho = random_drho(&mut r, &basis, &rho);
        let m = StateModel::new(
            basis.clone(),
            rho.clone(),
            vec![ParameterSlot::in_support("t", &basis, drho.clone())],
        )
        .unwrap();
        let l = sld_nonortho(&m, 0).unwrap();
        let expect = sld_by_vectorization(&rho, &drho);
        assert!(l.max_abs_diff(&expect) <= 1e-10 * expect.max_abs());
    }
}

#[test]
fn residual_and_hermiticity_on_random_non_orthogonal_models() {
    let mut r = rng(4);
    for _ in 0..200 {
        let dim = r.gen_range(2..=6);
        let support = r.gen_range(1..=dim);
        let m = random_model(&mut r, dim, support, 1);
        let sol = sld_nonortho_with_tol(&m, 0, 1e-12).unwrap();
        let slot = m.slot(0).unwrap();
        let n = slot.basis.len();
        let direct = lyapunov_residual(&m.rho().padded(n, n), slot.basis.gram(), &slot.drho, &sol.l);
        assert!((direct - sol.residual).abs() <= 1e-15 + 1e-6 * direct);
        assert!(sol.residual <= 1e-8 * slot.drho.max_abs(), "residual {:e}", sol.residual);
        assert!(sol.l.hermitian_deviation() <= 1e-9 * sol.l.max_abs());
        for i in support..n {
            for j in support..n {
                assert_eq!(sol.l[(i, j)], c(0.0, 0.0));
            }
        }
    }
}

#[test]
fn three_ket_example_in_skewed_basis() {
    let mut r = rng(5);
    let kets: Vec<Vec<C64>> = (0..3).map(|_| random_ket(&mut r, 3)).collect();
    let basis = BasisSet::new(kets, 3, 1e-10).unwrap();
    let rho = random_rho(&mut r, basis.gram());
    let drho = random_drho(&mut r, &basis, &rho);
    let m = StateModel::new(
        basis.clone(),
        rho.clone(),
        vec![ParameterSlot::in_support("t", &basis, drho.clone())],
    )
    .unwrap();
    let l = sld_nonortho(&m, 0).unwrap();
    assert!(lyapunov_residual(&rho, basis.gram(), &drho, &l) <= 1e-8);
}

#[test]
fn singular_rho_is_rejected_at_construction() {
    let basis = BasisSet::standard(2);
    let rho = CMatrix::real_diag(&[1.0, 0.0]);
    assert!(StateModel::without_params(basis, rho).is_err());
}
