//! Symmetric logarithmic derivatives in a non-orthogonal basis.
//!
//! With `ρ` supported on the first `s` kets of `B_μ` the Lyapunov equation
//! `2∂ρ = LGρ + ρGL` splits into blocks. Writing `C = ρ11 G11`,
//! `D = I⊗C + C̄⊗I` and `E = C⁻¹ ∂ρ12 G21 ρ11`, the solution with a zero
//! 22 block is
//!
//! ```text
//! L11 = 2 mat(D⁻¹ vec(∂ρ11 − E − E†))
//! L12 = 2 C⁻¹ ∂ρ12
//! L21 = 2 ∂ρ21 (C⁻¹)†
//! L22 = 0
//! ```

use crate::error::{QfimError, Result};
use crate::linalg::{check_condition, kron, mat, vec, BlockPartition, CMatrix, Lu, SOLVE_TOL};
use crate::model::StateModel;

/// An SLD together with its conditioning diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SldSolution {
    /// `L^{B_μ}`.
    pub l: CMatrix,
    pub cond_c: f64,
    pub cond_d: f64,
    /// `max|2∂ρ − LGρ − ρGL|` in `B_μ` coordinates.
    pub residual: f64,
    /// `max|∂ρ|`, the scale the residual is measured against.
    pub drho_scale: f64,
}

impl SldSolution {
    pub fn relative_residual(&self) -> f64 {
        if self.drho_scale == 0.0 {
            self.residual
        } else {
            self.residual / self.drho_scale
        }
    }
}

/// Solves `2∂ρ = LGρ + ρGL` where `ρ` is the `s×s` block `rho11` padded by
/// zeros onto the basis with Gram matrix `gram`.
pub fn solve_lyapunov_blocks(
    rho11: &CMatrix,
    gram: &CMatrix,
    drho: &CMatrix,
    solve_tol: f64,
) -> Result<SldSolution> {
    let s = rho11.rows();
    let n = gram.rows();
    if !rho11.is_square() || !gram.is_square() || s > n {
        return Err(QfimError::Dimension(format!(
            "rho block {}x{} does not fit a Gram matrix of size {}x{}",
            rho11.rows(),
            rho11.cols(),
            gram.rows(),
            gram.cols()
        )));
    }
    if drho.rows() != n || drho.cols() != n {
        return Err(QfimError::Dimension(format!(
            "drho is {}x{} for a basis of {n} kets",
            drho.rows(),
            drho.cols()
        )));
    }
    let solver = BlockSolver::new(rho11, gram, solve_tol)?;
    let rho = rho11.padded(n, n);
    let mut l = solver.solve(drho)?;
    let mut residual_m = residual_matrix(&rho, gram, drho, &l);
    let mut residual = residual_m.max_abs();
    // The map ∂ρ → L is linear, so the residual can be fed back to refine L.
    for _ in 0..MAX_REFINEMENTS {
        if residual == 0.0 {
            break;
        }
        let correction = solver.solve(&residual_m.scale_real(0.5).hermitian_part())?;
        let candidate = &l + &correction;
        let cand_m = residual_matrix(&rho, gram, drho, &candidate);
        let cand = cand_m.max_abs();
        if cand >= residual {
            break;
        }
        l = candidate;
        residual_m = cand_m;
        residual = cand;
    }
    Ok(SldSolution {
        l,
        cond_c: solver.cond_c,
        cond_d: solver.cond_d,
        residual,
        drho_scale: drho.max_abs(),
    })
}

const MAX_REFINEMENTS: usize = 3;

/// Factorizations of `C` and `D` for one `(ρ, G)` pair.
struct BlockSolver<'a> {
    rho11: &'a CMatrix,
    p: BlockPartition,
    g21: CMatrix,
    lu_c: Lu,
    lu_d: Lu,
    cond_c: f64,
    cond_d: f64,
}

impl<'a> BlockSolver<'a> {
    fn new(rho11: &'a CMatrix, gram: &CMatrix, solve_tol: f64) -> Result<Self> {
        let s = rho11.rows();
        let p = BlockPartition::new(s, s);
        let g11 = gram.block(p, 0, 0);
        let c = rho11 * &g11;
        let lu_c = Lu::factor(&c)?;
        let cond_c = check_condition(&lu_c, solve_tol)?;
        let id = CMatrix::identity(s);
        let d = &kron(&id, &c) + &kron(&c.conj(), &id);
        let lu_d = Lu::factor(&d)?;
        let cond_d = check_condition(&lu_d, solve_tol)?;
        Ok(Self {
            rho11,
            p,
            g21: gram.block(p, 1, 0),
            lu_c,
            lu_d,
            cond_c,
            cond_d,
        })
    }

    fn solve(&self, drho: &CMatrix) -> Result<CMatrix> {
        let s = self.rho11.rows();
        let n = drho.rows();
        let d11 = drho.block(self.p, 0, 0);
        let d12 = drho.block(self.p, 0, 1);

        // C⁻¹ is applied through LU solves; L21 = L12† because ∂ρ21 = ∂ρ12†.
        let mut l12_data = d12.scale_real(2.0).as_slice().to_vec();
        for col in l12_data.chunks_mut(s.max(1)) {
            self.lu_c.solve_in_place(col);
        }
        let l12 = CMatrix::from_col_major(s, n - s, l12_data)?;
        let l21 = l12.adjoint();

        let e = (&(&l12 * &self.g21) * self.rho11).scale_real(0.5);
        let rhs11 = &(&d11 - &e) - &e.adjoint();
        let mut x = vec(&rhs11);
        self.lu_d.solve_in_place(&mut x);
        let l11 = mat(&x, s)?.scale_real(2.0);

        let mut l = CMatrix::zeros(n, n);
        l.set_submatrix(0, 0, &l11);
        l.set_submatrix(0, s, &l12);
        l.set_submatrix(s, 0, &l21);
        Ok(l)
    }
}

fn residual_matrix(rho: &CMatrix, gram: &CMatrix, drho: &CMatrix, l: &CMatrix) -> CMatrix {
    let lgr = &(l * gram) * rho;
    let rgl = &(rho * gram) * l;
    &drho.scale_real(2.0) - &(&lgr + &rgl)
}

/// `max|2∂ρ − LGρ − ρGL|`.
pub fn lyapunov_residual(rho: &CMatrix, gram: &CMatrix, drho: &CMatrix, l: &CMatrix) -> f64 {
    residual_matrix(rho, gram, drho, l).max_abs()
}

/// SLD of parameter `mu`, returned in `B_μ` coordinates.
pub fn sld_nonortho(m: &StateModel, mu: usize) -> Result<CMatrix> {
    Ok(sld_nonortho_with_tol(m, mu, SOLVE_TOL)?.l)
}

pub fn sld_nonortho_with_tol(m: &StateModel, mu: usize, solve_tol: f64) -> Result<SldSolution> {
    let slot = m.slot(mu)?;
    solve_lyapunov_blocks(m.rho(), slot.basis.gram(), &slot.drho, solve_tol)
}
