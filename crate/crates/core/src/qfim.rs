//! QFIM and Γ assembly on joint bases `B_{μ,ν}`.

use serde::{Deserialize, Serialize};

use crate::basis::RANK_TOL;
use crate::error::Result;
use crate::linalg::{CMatrix, C64, SOLVE_TOL};
use crate::model::StateModel;
use crate::rmatrix::RealMatrix;
use crate::sld::{sld_nonortho_with_tol, SldSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfimOptions {
    pub rank_tol: f64,
    pub solve_tol: f64,
}

impl Default for QfimOptions {
    fn default() -> Self {
        Self {
            rank_tol: RANK_TOL,
            solve_tol: SOLVE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    pub cond_c: f64,
    pub cond_d: f64,
    pub residual: f64,
    pub relative_residual: f64,
    /// `max|L − L†|`.
    pub sld_hermitian_deviation: f64,
    pub basis_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub params: Vec<ParamDiagnostics>,
    pub rank_tol: f64,
    pub solve_tol: f64,
    /// Largest gap between `H_μν` evaluated on `B_{μ,ν}` and on `B_{ν,μ}`.
    pub h_asymmetry: f64,
    /// Largest `|Γ_μν + Γ_νμ|` before antisymmetrization.
    pub gamma_antisymmetry_defect: f64,
    /// Largest gap between `tr(L_μ G ∂_νρ G)` and `Re tr(ρ G L_μ G L_ν G)`.
    pub h_trace_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfimReport {
    pub labels: Vec<String>,
    pub h: RealMatrix,
    pub gamma: RealMatrix,
    /// `L_μ` in `B_μ` coordinates.
    pub slds: Vec<CMatrix>,
    pub diagnostics: Diagnostics,
}

/// `tr(A G B G)` for square coefficient matrices on the same basis.
fn trace_agbg(a: &CMatrix, g: &CMatrix, b: &CMatrix) -> C64 {
    let ag = a * g;
    let bg = b * g;
    let n = ag.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += ag[(i, k)] * bg[(k, i)];
        }
    }
    acc
}

/// Per-pair quantities: `tr(L_μ G ∂_νρ G)` and `tr(ρ G L_μ G L_ν G)`.
fn pair_terms(
    m: &StateModel,
    mu: usize,
    nu: usize,
    slds: &[SldSolution],
    rank_tol: f64,
) -> Result<(f64, C64)> {
    let s = m.basis().len();
    let slot_mu = m.slot(mu)?;
    let slot_nu = m.slot(nu)?;
    let ext = slot_mu.basis.extend_orthogonal(slot_nu.extension_kets(), rank_tol)?;
    let joint = &ext.basis;
    let n = joint.len();
    let n_nu = slot_nu.basis.len();

    // Coordinates of B_ν's kets in B_{μ,ν}.
    let t = CMatrix::from_fn(n, n_nu, |i, j| {
        if j < s {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        } else {
            ext.coords[j - s][i]
        }
    });
    let td = t.adjoint();
    let drho_nu = &(&t * &slot_nu.drho) * &td;
    let l_nu = &(&t * &slds[nu].l) * &td;
    let l_mu = slds[mu].l.padded(n, n);
    let rho = m.rho().padded(n, n);
    let g = joint.gram();

    let h = trace_agbg(&l_mu, g, &drho_nu).re;
    let lgl = &(&l_mu * g) * &l_nu;
    let q = trace_agbg(&rho, g, &lgl);
    Ok((h, q))
}

pub fn qfim(m: &StateModel) -> Result<QfimReport> {
    qfim_with_options(m, QfimOptions::default())
}

pub fn qfim_with_options(m: &StateModel, opts: QfimOptions) -> Result<QfimReport> {
    let np = m.params().len();
    let mut slds = Vec::with_capacity(np);
    for mu in 0..np {
        slds.push(sld_nonortho_with_tol(m, mu, opts.solve_tol)?);
    }

    let mut h_raw = RealMatrix::zeros(np, np);
    let mut g_raw = RealMatrix::zeros(np, np);
    let mut h_trace_mismatch: f64 = 0.0;
    for mu in 0..np {
        for nu in 0..np {
            let (h, q) = pair_terms(m, mu, nu, &slds, opts.rank_tol)?;
            h_raw[(mu, nu)] = h;
            g_raw[(mu, nu)] = q.im;
            h_trace_mismatch = h_trace_mismatch.max((h - q.re).abs());
        }
    }
    let h = RealMatrix::from_fn(np, np, |i, j| 0.5 * (h_raw[(i, j)] + h_raw[(j, i)]));
    let gamma = RealMatrix::from_fn(np, np, |i, j| 0.5 * (g_raw[(i, j)] - g_raw[(j, i)]));

    let params = m
        .params()
        .iter()
        .zip(&slds)
        .map(|(slot, sol)| ParamDiagnostics {
            name: slot.name.clone(),
            cond_c: sol.cond_c,
            cond_d: sol.cond_d,
            residual: sol.residual,
            relative_residual: sol.relative_residual(),
            sld_hermitian_deviation: sol.l.hermitian_deviation(),
            basis_size: slot.basis.len(),
        })
        .collect();

    Ok(QfimReport {
        labels: m.param_names(),
        diagnostics: Diagnostics {
            params,
            rank_tol: opts.rank_tol,
            solve_tol: opts.solve_tol,
            h_asymmetry: h_raw.asymmetry(),
            gamma_antisymmetry_defect: g_raw.antisymmetry_defect(),
            h_trace_mismatch,
        },
        h,
        gamma,
        slds: slds.into_iter().map(|s| s.l).collect(),
    })
}

/// `H_μμ` alone, solving only the one SLD.
pub fn qfi_single(m: &StateModel, mu: usize) -> Result<f64> {
    let sol = sld_nonortho_with_tol(m, mu, SOLVE_TOL)?;
    let slot = m.slot(mu)?;
    Ok(trace_agbg(&sol.l, slot.basis.gram(), &slot.drho).re)
}

pub fn gamma(m: &StateModel) -> Result<RealMatrix> {
    Ok(qfim(m)?.gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCompatibility {
    pub mu: usize,
    pub nu: usize,
    /// `|Γ_μν| ≤ tol·scale`.
    pub commutation: bool,
    /// `|H_μν| ≤ tol·scale`.
    pub independence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub pairs: Vec<PairCompatibility>,
    pub scale: f64,
}

impl CompatibilityReport {
    pub fn all_commute(&self) -> bool {
        self.pairs.iter().all(|p| p.commutation)
    }
}

/// Flags compatible off-diagonal pairs; `scale` is `max|H|`.
pub fn compatibility_of(report: &QfimReport, tol: f64) -> CompatibilityReport {
    let scale = report.h.max_abs();
    let n = report.h.rows();
    let mut pairs = Vec::new();
    for mu in 0..n {
        for nu in mu + 1..n {
            pairs.push(PairCompatibility {
                mu,
                nu,
                commutation: report.gamma[(mu, nu)].abs() <= tol * scale,
                independence: report.h[(mu, nu)].abs() <= tol * scale,
            });
        }
    }
    CompatibilityReport { pairs, scale }
}

pub fn compatibility(m: &StateModel, tol: f64) -> Result<CompatibilityReport> {
    Ok(compatibility_of(&qfim(m)?, tol))
}
