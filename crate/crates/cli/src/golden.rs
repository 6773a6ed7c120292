//! Reference scenes, random models and the built-in verification suite.

use qfim_core::closed_forms::{three_source_intensity_qfim, two_source_gamma};
use qfim_core::imaging::{
    build_state_model, centroid_relative_jacobian, generator_moments, two_source_primitive_params, Axis,
    CollectionPoint, ImagingScene, ParamSpec, Source,
};
use qfim_core::linalg::{CMatrix, C64};
use qfim_core::oracle::qfim_oracle_eigen;
use qfim_core::{qfim, reparameterize, BasisSet, ParameterSlot, QfimReport, Result, StateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seven points with spread in both directions and a nonzero mean.
pub fn asymmetric_cloud(a: f64) -> Vec<CollectionPoint> {
    [
        (1.0, 0.2),
        (-0.7, 0.5),
        (0.3, -0.9),
        (-0.2, -0.4),
        (0.8, 0.7),
        (-0.9, -0.1),
        (0.1, 0.95),
    ]
    .iter()
    .map(|&(v, w)| CollectionPoint { v: a * v, w: a * w })
    .collect()
}

/// Constant-radius cloud closed under `(v, w) → (−v, −w)`, built from
/// Pythagorean triples so that every generator sum is exact when `scale`
/// is a power of two.
pub fn exact_symmetric_ring(scale: f64) -> Vec<CollectionPoint> {
    [(5.0, 0.0), (0.0, 5.0), (3.0, 4.0), (4.0, 3.0), (3.0, -4.0), (4.0, -3.0)]
        .iter()
        .flat_map(|&(v, w)| {
            [
                CollectionPoint { v: scale * v, w: scale * w },
                CollectionPoint { v: -scale * v, w: -scale * w },
            ]
        })
        .collect()
}

/// Sources at `c − dx`, `c`, `c + dx` on the x axis with `p3 = 1 − p1 − p2`.
pub fn three_collinear(dx: f64, p1: f64, p2: f64, pts: Vec<CollectionPoint>, k: f64, estimate: Vec<ParamSpec>) -> ImagingScene {
    ImagingScene {
        sources: vec![
            Source::new(-dx, 0.0, 0.0, p1),
            Source::new(0.0, 0.0, 0.0, p2),
            Source::new(dx, 0.0, 0.0, 1.0 - p1 - p2),
        ],
        collection_points: pts,
        k,
        z0: 1.0,
        estimate,
    }
}

/// Sources at `c + δ` (intensity `p1`) and `c − δ`.
pub fn two_sources(c: [f64; 3], delta: [f64; 3], p1: f64, pts: Vec<CollectionPoint>, k: f64, estimate: Vec<ParamSpec>) -> ImagingScene {
    ImagingScene {
        sources: vec![
            Source::new(c[0] + delta[0], c[1] + delta[1], c[2] + delta[2], p1),
            Source::new(c[0] - delta[0], c[1] - delta[1], c[2] - delta[2], 1.0 - p1),
        ],
        collection_points: pts,
        k,
        z0: 1.0,
        estimate,
    }
}

pub fn intensity_params() -> Vec<ParamSpec> {
    vec![ParamSpec::Probability { source: 0 }, ParamSpec::Probability { source: 1 }]
}

/// `∂/∂δx` for outer sources at `c ∓ δx`.
pub fn outer_spread_param() -> ParamSpec {
    ParamSpec::Combination {
        name: "dx".into(),
        terms: vec![
            qfim_core::imaging::PositionTerm { source: 0, axis: Axis::X, coef: -1.0 },
            qfim_core::imaging::PositionTerm { source: 2, axis: Axis::X, coef: 1.0 },
        ],
    }
}

/// Numerical `H`, `Γ` of a two-source scene in `(δ, c, p1)` coordinates,
/// plus the full report in primitive coordinates.
pub fn two_source_numerical(scene: &ImagingScene) -> Result<(qfim_core::RealMatrix, qfim_core::RealMatrix, QfimReport)> {
    let mut s = scene.clone();
    s.estimate = two_source_primitive_params();
    let rep = qfim(&build_state_model(&s, qfim_core::RANK_TOL)?)?;
    let j = centroid_relative_jacobian();
    Ok((reparameterize(&rep.h, &j)?, reparameterize(&rep.gamma, &j)?, rep))
}

pub fn worst_relative_residual(rep: &QfimReport) -> f64 {
    rep.diagnostics.params.iter().map(|p| p.relative_residual).fold(0.0, f64::max)
}

fn random_ket(r: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
}

fn random_matrix(r: &mut impl Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

/// A random full-rank model on `support` non-orthogonal kets in `C^dim`
/// with `np` parameters, each extended by up to `dim − support` random kets.
pub fn random_model(r: &mut impl Rng, dim: usize, support: usize, np: usize) -> StateModel {
    loop {
        let kets: Vec<Vec<C64>> = (0..support).map(|_| random_ket(r, dim)).collect();
        let Ok(basis) = BasisSet::new(kets, support, qfim_core::RANK_TOL) else {
            continue;
        };
        let a = random_matrix(r, support);
        let pos = &(&a * &a.adjoint()) + &CMatrix::identity(support).scale_real(0.3);
        let rho = pos.scale_real(1.0 / (&pos * basis.gram()).trace().re);
        let mut slots = Vec::with_capacity(np);
        for mu in 0..np {
            let e = r.gen_range(0..=dim - support);
            let ext: Vec<Vec<C64>> = (0..e).map(|_| random_ket(r, dim)).collect();
            let Ok(extension) = basis.extend(&ext, qfim_core::RANK_TOL) else {
                continue;
            };
            let bm = extension.basis;
            let n = bm.len();
            let mut d = random_matrix(r, n).hermitian_part();
            for i in support..n {
                for j in support..n {
                    d[(i, j)] = C64::new(0.0, 0.0);
                }
            }
            let t = (&d * bm.gram()).trace().re;
            let drho = &d - &rho.padded(n, n).scale_real(t);
            slots.push(ParameterSlot {
                name: format!("t{mu}"),
                basis: bm,
                drho,
            });
        }
        if slots.len() != np {
            continue;
        }
        if let Ok(m) = StateModel::new(basis, rho, slots) {
            return m;
        }
    }
}

/// A random full-rank model in the standard basis of `C^n`.
pub fn random_orthonormal_model(r: &mut impl Rng, n: usize, np: usize) -> StateModel {
    let basis = BasisSet::standard(n);
    let a = random_matrix(r, n);
    let pos = &(&a * &a.adjoint()) + &CMatrix::identity(n).scale_real(0.3);
    let rho = pos.scale_real(1.0 / pos.trace().re);
    let slots = (0..np)
        .map(|mu| {
            let d = random_matrix(r, n).hermitian_part();
            let t = d.trace().re;
            ParameterSlot::in_support(format!("t{mu}"), &basis, &d - &rho.scale_real(t))
        })
        .collect();
    StateModel::new(basis, rho, slots).expect("standard basis with a positive state is a valid model")
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One line of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Largest `max|H − H_oracle| / max|H_oracle|` over `count` random models.
pub fn oracle_equivalence(count: usize, seed: u64) -> Result<f64> {
    let mut r = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let dim = r.gen_range(2..=6);
        let support = r.gen_range(1..=dim);
        let np = r.gen_range(1..=3);
        let m = random_model(&mut r, dim, support, np);
        let rep = qfim(&m)?;
        let rho = m.rho_ambient()?;
        let drhos = (0..np).map(|mu| m.drho_ambient(mu)).collect::<Result<Vec<_>>>()?;
        let oracle = qfim_oracle_eigen(&rho, &drhos)?;
        worst = worst.max(rep.h.max_abs_diff(&oracle) / oracle.max_abs());
    }
    Ok(worst)
}

fn check_oracle() -> Check {
    let tol = 1e-7;
    match oracle_equivalence(100, 7) {
        Ok(w) => Check {
            name: "oracle equivalence (100 random models)",
            passed: w <= tol,
            detail: format!("max rel. deviation {w:.2e} (tol {tol:.0e})"),
        },
        Err(e) => Check {
            name: "oracle equivalence (100 random models)",
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn check_intensity() -> Check {
    let name = "three-source intensity QFIM, p1 = p2 = 1/3";
    let run = || -> Result<(f64, [[f64; 2]; 2])> {
        let dx = 1e-3;
        let sc = three_collinear(dx, 1.0 / 3.0, 1.0 / 3.0, asymmetric_cloud(0.05), 2000.0, intensity_params());
        let h = qfim(&build_state_model(&sc, qfim_core::RANK_TOL)?)?.h;
        let m = generator_moments(&sc);
        let s = dx * dx * m.var(Axis::X);
        let expect = [[16.0, 8.0], [8.0, 5.5]];
        let cf = three_source_intensity_qfim(&m, 1.0 / 3.0, 1.0 / 3.0, dx)?;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((h[(i, j)] / s - expect[i][j]).abs() / expect[i][j]);
                worst = worst.max((cf[(i, j)] / s - expect[i][j]).abs() / expect[i][j]);
            }
        }
        Ok((worst, [[h[(0, 0)] / s, h[(0, 1)] / s], [h[(1, 0)] / s, h[(1, 1)] / s]]))
    };
    match run() {
        Ok((w, h)) => Check {
            name,
            passed: w <= 2e-2,
            detail: format!(
                "H/(dx^2 Var gx) = [[{:.3}, {:.3}], [{:.3}, {:.3}]], max rel. dev. {w:.2e}",
                h[0][0], h[0][1], h[1][0], h[1][1]
            ),
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn check_radial_symmetry() -> Check {
    let name = "two sources, point-symmetric ring: Gamma = 0";
    let run = || -> Result<(f64, f64)> {
        let delta = [5e-4, 0.0, 0.0];
        let sc = two_sources([1e-3, -5e-4, 0.0], delta, 0.3, exact_symmetric_ring(1.0 / 128.0), 2000.0, vec![]);
        let cf = two_source_gamma(&generator_moments(&sc), 0.3, delta)?;
        let (h, g, _) = two_source_numerical(&sc)?;
        Ok((cf.max_abs(), g.max_abs() / h.max_abs()))
    };
    match run() {
        Ok((cf, ratio)) => {
            let sep = 1e-3;
            Check {
                name,
                passed: cf == 0.0 && ratio <= 1e-3 * sep,
                detail: format!("closed form max|Gamma| = {cf:e}, numerical max|Gamma|/max|H| = {ratio:.2e}"),
            }
        }
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn golden_suite() -> Vec<Check> {
    vec![check_oracle(), check_intensity(), check_radial_symmetry()]
}

pub fn render_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status}  {:<width$}  {}\n", c.name, c.detail));
    }
    out
}
