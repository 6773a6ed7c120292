//! Reference QFIM evaluations in an orthonormal ambient basis.

use serde::{Deserialize, Serialize};

use crate::error::{QfimError, Result};
use crate::linalg::{eig_hermitian, inner, kron, solve_with_tol, vec, CMatrix, C64, SOLVE_TOL};
use crate::rmatrix::RealMatrix;

/// Cut applied to `λ_j + λ_k` in the eigenbasis sum.
pub const EIG_CUT: f64 = 1e-12;

pub const DEFAULT_S_SEQUENCE: [f64; 3] = [1e-3, 1e-4, 1e-5];

fn check_inputs(rho: &CMatrix, drhos: &[CMatrix]) -> Result<()> {
    if !rho.is_square() {
        return Err(QfimError::Dimension("rho must be square".into()));
    }
    for d in drhos {
        if d.rows() != rho.rows() || d.cols() != rho.cols() {
            return Err(QfimError::Dimension(format!(
                "drho is {}x{} but rho is {}x{}",
                d.rows(),
                d.cols(),
                rho.rows(),
                rho.cols()
            )));
        }
        if !d.is_hermitian(1e-10) {
            return Err(QfimError::NotHermitian {
                deviation: d.hermitian_deviation(),
            });
        }
    }
    Ok(())
}

/// `H_μν = 2 Σ Re(⟨j|∂_μρ|k⟩⟨k|∂_νρ|j⟩) / (λ_j + λ_k)` over pairs with `λ_j + λ_k > eig_cut`.
pub fn qfim_oracle_eigen_with_cut(rho: &CMatrix, drhos: &[CMatrix], eig_cut: f64) -> Result<RealMatrix> {
    check_inputs(rho, drhos)?;
    let eig = eig_hermitian(rho)?;
    let v = &eig.vectors;
    let vd = v.adjoint();
    let rotated: Vec<CMatrix> = drhos.iter().map(|d| &(&vd * d) * v).collect();
    let n = rho.rows();
    let np = drhos.len();
    let mut h = RealMatrix::zeros(np, np);
    for j in 0..n {
        for k in 0..n {
            let den = eig.values[j] + eig.values[k];
            if den <= eig_cut {
                continue;
            }
            for mu in 0..np {
                for nu in mu..np {
                    let t = (rotated[mu][(j, k)] * rotated[nu][(k, j)]).re;
                    h[(mu, nu)] += 2.0 * t / den;
                }
            }
        }
    }
    for mu in 0..np {
        for nu in 0..mu {
            h[(mu, nu)] = h[(nu, mu)];
        }
    }
    Ok(h)
}

pub fn qfim_oracle_eigen(rho: &CMatrix, drhos: &[CMatrix]) -> Result<RealMatrix> {
    qfim_oracle_eigen_with_cut(rho, drhos, EIG_CUT)
}

/// `2 vec(∂_μρ)† (ρ̄⊗I + I⊗ρ)⁻¹ vec(∂_νρ)` for full-rank `ρ`.
pub fn qfim_safranek(rho: &CMatrix, drhos: &[CMatrix]) -> Result<RealMatrix> {
    check_inputs(rho, drhos)?;
    let n = rho.rows();
    let id = CMatrix::identity(n);
    let m = &kron(&rho.conj(), &id) + &kron(&id, rho);
    let vecs: Vec<Vec<C64>> = drhos.iter().map(vec).collect();
    let mut solved = Vec::with_capacity(vecs.len());
    for v in &vecs {
        solved.push(solve_with_tol(&m, v, SOLVE_TOL)?.value);
    }
    let np = drhos.len();
    let mut h = RealMatrix::zeros(np, np);
    for mu in 0..np {
        for nu in 0..np {
            h[(mu, nu)] = 2.0 * inner(&vecs[mu], &solved[nu]).re;
        }
    }
    Ok(RealMatrix::from_fn(np, np, |i, j| 0.5 * (h[(i, j)] + h[(j, i)])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedQfim {
    /// Extrapolated to `s → 0`.
    pub h: RealMatrix,
    /// Values at each `s`, in the order given.
    pub samples: Vec<RealMatrix>,
    /// `max|H_all − H_without_largest_s|`, the error estimate.
    pub spread: f64,
    /// `spread ≤ tol · max(1, max|H|)`.
    pub converged: bool,
}

/// Value at zero of the interpolating polynomial through `(xs, ys)`.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// Šafránek form with `ρ_s = (1−s)ρ + s I/d`, extrapolated to `s → 0`.
pub fn qfim_safranek_regularized(
    rho: &CMatrix,
    drhos: &[CMatrix],
    s_sequence: &[f64],
    tol: f64,
) -> Result<RegularizedQfim> {
    check_inputs(rho, drhos)?;
    if s_sequence.is_empty()
        || s_sequence.iter().any(|&s| !(s > 0.0 && s < 1.0))
        || s_sequence.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(QfimError::InvalidModel(
            "s sequence must be strictly decreasing inside (0, 1)".into(),
        ));
    }
    let d = rho.rows();
    let id = CMatrix::identity(d);
    let mut samples = Vec::with_capacity(s_sequence.len());
    for &s in s_sequence {
        let rho_s = &rho.scale_real(1.0 - s) + &id.scale_real(s / d as f64);
        let drho_s: Vec<CMatrix> = drhos.iter().map(|x| x.scale_real(1.0 - s)).collect();
        samples.push(qfim_safranek(&rho_s, &drho_s)?);
    }
    let np = drhos.len();
    let extrapolate = |from: usize| {
        RealMatrix::from_fn(np, np, |i, j| {
            let ys: Vec<f64> = samples[from..].iter().map(|h| h[(i, j)]).collect();
            neville_at_zero(&s_sequence[from..], &ys)
        })
    };
    let h = extrapolate(0);
    let spread = if samples.len() > 1 {
        h.max_abs_diff(&extrapolate(1))
    } else {
        f64::INFINITY
    };
    let converged = spread <= tol * h.max_abs().max(1.0);
    Ok(RegularizedQfim {
        h,
        samples,
        spread,
        converged,
    })
}
