//! Parameterized density operators expressed in a non-orthogonal basis.

use crate::basis::BasisSet;
use crate::error::{QfimError, Result};
use crate::linalg::{eig_hermitian, BlockPartition, CMatrix, C64};

/// Tolerance on `tr(ρG) = 1` and `tr(∂ρ G) = 0`.
pub const TRACE_TOL: f64 = 1e-10;

/// Relative Hermiticity slack applied to user-supplied coefficient matrices.
const COEFF_HERMITIAN_TOL: f64 = 1e-10;

/// Derivative `∂_μ ρ` of one parameter, given in `B_μ = B ∪ extensions`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSlot {
    pub name: String,
    /// `B_μ`; its support block is the model basis `B`.
    pub basis: BasisSet,
    /// `(∂_μ ρ)^{B_μ}`.
    pub drho: CMatrix,
}

impl ParameterSlot {
    /// A slot whose derivative is supported by `B` itself.
    pub fn in_support(name: impl Into<String>, basis: &BasisSet, drho: CMatrix) -> Self {
        Self {
            name: name.into(),
            basis: basis.clone(),
            drho,
        }
    }

    pub fn extension_kets(&self) -> &[Vec<C64>] {
        &self.basis.kets()[self.basis.support_size()..]
    }

    pub fn partition(&self) -> BlockPartition {
        let s = self.basis.support_size();
        BlockPartition::new(s, s)
    }
}

/// `ρ = Σ ρ_jk |ψ_j⟩⟨ψ_k|` with full-rank coefficients in a basis `B`
/// spanning its support, plus one derivative slot per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct StateModel {
    basis: BasisSet,
    rho: CMatrix,
    params: Vec<ParameterSlot>,
}

impl StateModel {
    pub fn new(basis: BasisSet, rho: CMatrix, params: Vec<ParameterSlot>) -> Result<Self> {
        let model = Self {
            basis,
            rho,
            params,
        };
        model.validate()?;
        Ok(model)
    }

    /// Model without parameters, e.g. the initial state of a unitary family.
    pub fn without_params(basis: BasisSet, rho: CMatrix) -> Result<Self> {
        Self::new(basis, rho, Vec::new())
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn params(&self) -> &[ParameterSlot] {
        &self.params
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn with_params(&self, params: Vec<ParameterSlot>) -> Result<Self> {
        Self::new(self.basis.clone(), self.rho.clone(), params)
    }

    /// `ρ` as an ambient matrix.
    pub fn rho_ambient(&self) -> Result<CMatrix> {
        self.basis.to_ambient(&self.rho)
    }

    /// `∂_μ ρ` as an ambient matrix.
    pub fn drho_ambient(&self, mu: usize) -> Result<CMatrix> {
        let slot = self.slot(mu)?;
        slot.basis.to_ambient(&slot.drho)
    }

    pub fn slot(&self, mu: usize) -> Result<&ParameterSlot> {
        self.params.get(mu).ok_or_else(|| {
            QfimError::InvalidModel(format!(
                "parameter index {mu} out of range ({} parameters)",
                self.params.len()
            ))
        })
    }

    /// Smallest eigenvalue of `G^{1/2} ρ G^{1/2}`, i.e. of `ρ` on its support.
    pub fn smallest_support_eigenvalue(&self) -> Result<f64> {
        let g = eig_hermitian(self.basis.gram())?;
        let sqrt_vals: Vec<f64> = g.values.iter().map(|v| v.max(0.0).sqrt()).collect();
        let g_half = &(&g.vectors * &CMatrix::real_diag(&sqrt_vals)) * &g.vectors.adjoint();
        let sandwiched = &(&g_half * &self.rho) * &g_half;
        let e = eig_hermitian(&sandwiched.hermitian_part())?;
        Ok(e.values[0])
    }

    fn validate(&self) -> Result<()> {
        let b = &self.basis;
        let n = b.len();
        if b.support_size() != n {
            return Err(QfimError::InvalidModel(format!(
                "state basis must be pure support ({} of {n} kets are support)",
                b.support_size()
            )));
        }
        if self.rho.rows() != n || self.rho.cols() != n {
            return Err(QfimError::InvalidModel(format!(
                "rho is {}x{} but the basis has {n} kets",
                self.rho.rows(),
                self.rho.cols()
            )));
        }
        if !self.rho.is_hermitian(COEFF_HERMITIAN_TOL) {
            return Err(QfimError::NotHermitian {
                deviation: self.rho.hermitian_deviation(),
            });
        }
        let tr = (&self.rho * b.gram()).trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(QfimError::InvalidModel(format!(
                "tr(rho G) = {tr} differs from 1"
            )));
        }
        let lmin = self.smallest_support_eigenvalue()?;
        if lmin < b.rank_tol() {
            return Err(QfimError::InvalidModel(format!(
                "rho is not full rank on its basis (smallest eigenvalue {lmin:e})"
            )));
        }
        for (mu, slot) in self.params.iter().enumerate() {
            self.validate_slot(mu, slot)?;
        }
        Ok(())
    }

    fn validate_slot(&self, mu: usize, slot: &ParameterSlot) -> Result<()> {
        let s = self.basis.len();
        let bm = &slot.basis;
        if bm.support_size() != s || bm.kets()[..s] != *self.basis.kets() {
            return Err(QfimError::InvalidModel(format!(
                "parameter {mu} ({}): basis does not start with the state basis",
                slot.name
            )));
        }
        let n = bm.len();
        if slot.drho.rows() != n || slot.drho.cols() != n {
            return Err(QfimError::InvalidModel(format!(
                "parameter {mu} ({}): drho is {}x{} for a basis of {n} kets",
                slot.name,
                slot.drho.rows(),
                slot.drho.cols()
            )));
        }
        if !slot.drho.is_hermitian(COEFF_HERMITIAN_TOL) {
            return Err(QfimError::NotHermitian {
                deviation: slot.drho.hermitian_deviation(),
            });
        }
        let scale = slot.drho.max_abs();
        let d22 = slot.drho.block(slot.partition(), 1, 1);
        if d22.max_abs() > COEFF_HERMITIAN_TOL * scale {
            return Err(QfimError::InvalidModel(format!(
                "parameter {mu} ({}): extension block of drho is nonzero ({:e})",
                slot.name,
                d22.max_abs()
            )));
        }
        let tr = (&slot.drho * bm.gram()).trace();
        if tr.norm() > TRACE_TOL * scale.max(1.0) {
            return Err(QfimError::InvalidModel(format!(
                "parameter {mu} ({}): tr(drho G) = {tr} is not zero",
                slot.name
            )));
        }
        Ok(())
    }
}
