//! QFIM of unitary families `ρ(θ) = U ρ0 U†` with `U = exp(−i Σ K_μ θ_μ)`.
//!
//! For commuting generators the QFIM does not depend on `θ`, so it is
//! evaluated at `θ = 0` with `∂_μρ = −i[K_μ, ρ0]`.

use crate::error::{QfimError, Result};
use crate::linalg::{CMatrix, C64, I};
use crate::model::{ParameterSlot, StateModel};
use crate::qfim::{qfim_with_options, QfimOptions, QfimReport};
use crate::rmatrix::RealMatrix;

/// Relative tolerance on `max|[K_μ, K_ν]|`.
pub const COMMUTE_TOL: f64 = 1e-10;

pub fn check_commuting(generators: &[CMatrix]) -> Result<()> {
    for a in 0..generators.len() {
        for b in a + 1..generators.len() {
            let (ka, kb) = (&generators[a], &generators[b]);
            if ka.rows() != kb.rows() || !ka.is_square() || !kb.is_square() {
                return Err(QfimError::Dimension("generators must be square and equal-sized".into()));
            }
            let comm = &(ka * kb) - &(kb * ka);
            let scale = (ka.max_abs() * kb.max_abs()).max(f64::MIN_POSITIVE);
            let deviation = comm.max_abs();
            if deviation > COMMUTE_TOL * scale {
                return Err(QfimError::NonCommutingGenerators {
                    first: a,
                    second: b,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

/// Attaches one slot per generator to a parameter-free `rho0`.
pub fn unitary_model(rho0: &StateModel, generators: &[CMatrix], rank_tol: f64) -> Result<StateModel> {
    check_commuting(generators)?;
    let b = rho0.basis();
    let s = b.len();
    let mut slots = Vec::with_capacity(generators.len());
    for (mu, k) in generators.iter().enumerate() {
        if k.rows() != b.ambient_dim() || !k.is_hermitian(1e-10) {
            return Err(QfimError::InvalidModel(format!(
                "generator {mu} must be a Hermitian {0}x{0} matrix",
                b.ambient_dim()
            )));
        }
        let images: Vec<Vec<C64>> = b.kets().iter().map(|psi| k.mul_vec(psi)).collect::<Result<_>>()?;
        let ext = b.extend_orthogonal(&images, rank_tol)?;
        let n = ext.basis.len();
        // K ρ0 = Σ ρ_jk (K|ψ_j⟩)⟨ψ_k| has coefficients D ρ11 in the first s columns.
        let d = CMatrix::from_fn(n, s, |i, j| ext.coords[j][i]);
        let a = (&d * rho0.rho()).padded(n, n);
        let drho = (&a - &a.adjoint()).scale(-I);
        slots.push(ParameterSlot {
            name: format!("K{mu}"),
            basis: ext.basis,
            drho,
        });
    }
    rho0.with_params(slots)
}

pub fn qfim_unitary_report(rho0: &StateModel, generators: &[CMatrix], opts: QfimOptions) -> Result<QfimReport> {
    qfim_with_options(&unitary_model(rho0, generators, opts.rank_tol)?, opts)
}

pub fn qfim_unitary(rho0: &StateModel, generators: &[CMatrix]) -> Result<RealMatrix> {
    Ok(qfim_unitary_report(rho0, generators, QfimOptions::default())?.h)
}
