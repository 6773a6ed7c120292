#![allow(dead_code)]

use qfim_core::imaging::{CollectionPoint, ImagingScene, ParamSpec, Source};
use qfim_core::linalg::{inner, CMatrix, C64};
use qfim_core::{BasisSet, ParameterSlot, StateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_ket(r: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect()
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> CMatrix {
    random_matrix(r, n, n).hermitian_part()
}

/// `A A† + shift·I`, positive definite.
pub fn random_positive(r: &mut impl Rng, n: usize, shift: f64) -> CMatrix {
    let a = random_matrix(r, n, n);
    &(&a * &a.adjoint()) + &CMatrix::identity(n).scale_real(shift)
}

/// Random full-rank `ρ^B` normalized so `tr(ρG) = 1`.
pub fn random_rho(r: &mut impl Rng, gram: &CMatrix) -> CMatrix {
    let n = gram.rows();
    let rho = random_positive(r, n, 0.3);
    let tr = (&rho * gram).trace().re;
    rho.scale_real(1.0 / tr)
}

/// Random traceless derivative on `bm` whose 22 block is zero.
pub fn random_drho(r: &mut impl Rng, bm: &BasisSet, rho: &CMatrix) -> CMatrix {
    let s = bm.support_size();
    let n = bm.len();
    let mut d = random_hermitian(r, n);
    for i in s..n {
        for j in s..n {
            d[(i, j)] = c(0.0, 0.0);
        }
    }
    let t = (&d * bm.gram()).trace().re;
    &d - &rho.padded(n, n).scale_real(t)
}

/// A model on a random non-orthogonal basis of `support` kets in `C^dim`,
/// with `np` parameters each extended by up to `dim − support` random kets.
pub fn random_model(r: &mut impl Rng, dim: usize, support: usize, np: usize) -> StateModel {
    loop {
        let kets: Vec<Vec<C64>> = (0..support).map(|_| random_ket(r, dim)).collect();
        let Ok(basis) = BasisSet::new(kets, support, 1e-10) else {
            continue;
        };
        let rho = random_rho(r, basis.gram());
        let mut slots = Vec::new();
        for mu in 0..np {
            let e = r.gen_range(0..=dim - support);
            let ext: Vec<Vec<C64>> = (0..e).map(|_| random_ket(r, dim)).collect();
            let bm = basis.extend(&ext, 1e-10).unwrap().basis;
            let drho = random_drho(r, &bm, &rho);
            slots.push(ParameterSlot {
                name: format!("t{mu}"),
                basis: bm,
                drho,
            });
        }
        if let Ok(m) = StateModel::new(basis, rho, slots) {
            return m;
        }
    }
}

pub fn ambient_forms(m: &StateModel) -> (CMatrix, Vec<CMatrix>) {
    let rho = m.rho_ambient().unwrap();
    let d = (0..m.params().len()).map(|mu| m.drho_ambient(mu).unwrap()).collect();
    (rho, d)
}

/// `4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)`.
pub fn pure_state_qfi(psi: &[C64], dpsi: &[C64]) -> f64 {
    4.0 * (inner(dpsi, dpsi).re - inner(psi, dpsi).norm_sqr())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Collection points on a ring of radius `a`, closed under `(v, w) → (−v, −w)`.
pub fn ring(n: usize, a: f64, phase: f64) -> Vec<CollectionPoint> {
    (0..n)
        .map(|j| {
            let t = phase + 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            CollectionPoint { v: a * t.cos(), w: a * t.sin() }
        })
        .collect()
}

/// Asymmetric cloud with spread in v and w and a nonzero mean.
pub fn asymmetric_cloud(a: f64) -> Vec<CollectionPoint> {
    let pts = [
        (1.0, 0.2),
        (-0.7, 0.5),
        (0.3, -0.9),
        (-0.2, -0.4),
        (0.8, 0.7),
        (-0.9, -0.1),
        (0.1, 0.95),
    ];
    pts.iter().map(|&(v, w)| CollectionPoint { v: a * v, w: a * w }).collect()
}

pub fn scene(sources: Vec<Source>, pts: Vec<CollectionPoint>, k: f64, estimate: Vec<ParamSpec>) -> ImagingScene {
    ImagingScene {
        sources,
        collection_points: pts,
        k,
        z0: 1.0,
        estimate,
    }
}

/// Constant-radius cloud closed under `(v, w) → (−v, −w)` whose generator
/// sums are exact in binary floating point; `scale` should be a power of two.
pub fn exact_symmetric_ring(scale: f64) -> Vec<CollectionPoint> {
    let base = [(5.0, 0.0), (0.0, 5.0), (3.0, 4.0), (4.0, 3.0), (3.0, -4.0), (4.0, -3.0)];
    base.iter()
        .flat_map(|&(v, w)| {
            [
                CollectionPoint { v: scale * v, w: scale * w },
                CollectionPoint { v: -scale * v, w: -scale * w },
            ]
        })
        .collect()
}

/// `asymmetric_cloud` together with the negation of every point.
pub fn symmetric_cloud(a: f64) -> Vec<CollectionPoint> {
    asymmetric_cloud(a)
        .into_iter()
        .flat_map(|p| [p, CollectionPoint { v: -p.v, w: -p.w }])
        .collect()
}
