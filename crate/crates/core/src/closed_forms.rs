//! Lowest-order analytic QFIM and Γ for two and three sources.
//!
//! Two-source matrices use the parameter order `(δx,δy,δz,cx,cy,cz,p1)`
//! with `r1 = c + δ`, `r2 = c − δ`. The relative intensity couples to the
//! centroid block; the relative block is independent of it.

use crate::error::{QfimError, Result};
use crate::imaging::{Axis, GeneratorMoments};
use crate::rmatrix::RealMatrix;

/// Two-source QFIM together with a flag for the ill-defined `δ = 0` case.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSourceQfim {
    pub h: RealMatrix,
    /// `Var(δ·g) = 0`: the `(p1, p1)` entry is zero and meaningless.
    pub degenerate_delta: bool,
}

fn check_p1(p1: f64) -> Result<()> {
    if p1 <= 0.0 || p1 >= 1.0 {
        return Err(QfimError::DivisionByZero(format!(
            "p1(1 − p1) vanishes or is negative at p1 = {p1}"
        )));
    }
    Ok(())
}

pub fn two_source_qfim(m: &GeneratorMoments, p1: f64, delta: [f64; 3]) -> Result<TwoSourceQfim> {
    check_p1(p1)?;
    let cov = m.cov();
    let cd = m.cov_with(delta);
    let var_d = m.var_along(delta);
    let mut h = RealMatrix::zeros(7, 7);
    for a in 0..3 {
        for b in 0..3 {
            h[(a, b)] = 4.0 * cov[a][b];
            h[(a + 3, b + 3)] = 4.0 * cov[a][b];
            h[(a, b + 3)] = 4.0 * (2.0 * p1 - 1.0) * cov[a][b];
            h[(a + 3, b)] = 4.0 * (2.0 * p1 - 1.0) * cov[a][b];
        }
        h[(a + 3, 6)] = 8.0 * cd[a];
        h[(6, a + 3)] = 8.0 * cd[a];
    }
    h[(6, 6)] = 4.0 * var_d / (p1 * (1.0 - p1));
    Ok(TwoSourceQfim {
        h,
        degenerate_delta: var_d == 0.0,
    })
}

pub fn two_source_gamma(m: &GeneratorMoments, p1: f64, delta: [f64; 3]) -> Result<RealMatrix> {
    let g23 = m.gamma23(delta);
    let g13: [f64; 3] = g23.map(|x| (2.0 * p1 - 1.0) * x);
    let var_d = m.var_along(delta);
    let cd = m.cov_with(delta);
    let g12 = if g23.iter().all(|&x| x == 0.0) {
        [[0.0; 3]; 3]
    } else {
        if var_d == 0.0 {
            return Err(QfimError::DivisionByZero(
                "Var(δ·g) vanishes while Γ23 does not".into(),
            ));
        }
        let f = 2.0 * p1 * (p1 - 1.0) / var_d;
        [0, 1, 2].map(|a| [0, 1, 2].map(|b| f * g23[a] * cd[b]))
    };
    // Blocks: Γ12 couples centroid rows to relative columns, Γ13 centroid to
    // p1, Γ23 relative to p1.
    let mut gm = RealMatrix::zeros(7, 7);
    for a in 0..3 {
        for b in 0..3 {
            gm[(a + 3, b)] = 4.0 * g12[a][b];
            gm[(b, a + 3)] = -4.0 * g12[a][b];
        }
        gm[(a + 3, 6)] = 4.0 * g13[a];
        gm[(6, a + 3)] = -4.0 * g13[a];
        gm[(a, 6)] = 4.0 * g23[a];
        gm[(6, a)] = -4.0 * g23[a];
    }
    Ok(gm)
}

/// Distance QFI for sources at `c − δx`, `c`, `c + δx`.
pub fn three_source_distance_qfi(m: &GeneratorMoments, p2: f64) -> f64 {
    4.0 * (1.0 - p2) * m.var(Axis::X)
}

/// Distance QFI for `x1 = c + δx(q − ½)`, `x2 = c + δx(q + ½)`.
pub fn two_source_scaled_qfi(m: &GeneratorMoments, q: f64, p2: f64) -> f64 {
    (1.0 + 4.0 * q * q + 4.0 * q * (2.0 * p2 - 1.0)) * m.var(Axis::X)
}

/// QFIM for `(p1, p2)` of three sources at `c − δx`, `c`, `c + δx`.
pub fn three_source_intensity_qfim(m: &GeneratorMoments, p1: f64, p2: f64, delta_x: f64) -> Result<RealMatrix> {
    let den = (1.0 - p2) * (4.0 * p1 + p2) - 4.0 * p1 * p1;
    if den == 0.0 || !den.is_finite() {
        return Err(QfimError::DivisionByZero(format!(
            "(1 − p2)(4p1 + p2) − 4p1² vanishes at p1 = {p1}, p2 = {p2}"
        )));
    }
    let pre = delta_x * delta_x * m.var(Axis::X) / den;
    let off = 4.0 * (1.0 + 2.0 * p1 - p2);
    RealMatrix::from_rows(&[
        vec![pre * 16.0 * (1.0 - p2), pre * off],
        vec![pre * off, pre * (1.0 + 8.0 * p1)],
    ])
}
