//! Ordered, possibly non-orthogonal ket bases with cached Gram matrices.

use crate::error::{QfimError, Result};
use crate::linalg::{inner, norm, singular_values, CMatrix, C64, ZERO};

/// Default relative singular-value cutoff for linear independence.
pub const RANK_TOL: f64 = 1e-10;

/// Linearly independent kets in ambient coordinates.
///
/// The first `support_size` kets span the support of the density operator;
/// any further kets are extensions (derivative directions).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    ambient_dim: usize,
    kets: Vec<Vec<C64>>,
    support_size: usize,
    gram: CMatrix,
    rank_tol: f64,
}

/// Result of appending kets to a basis: the grown basis plus, for every
/// requested ket, its coordinates in the grown basis.
#[derive(Debug, Clone)]
pub struct Extension {
    pub basis: BasisSet,
    pub coords: Vec<Vec<C64>>,
    /// Indices (into the requested list) of kets that were already in the span.
    pub dropped: Vec<usize>,
}

/// Incremental orthonormal frame `K = Q R` (modified Gram–Schmidt, two passes).
#[derive(Debug, Clone, Default)]
struct Frame {
    q: Vec<Vec<C64>>,
    /// Column `k` of `R`, length `k + 1`.
    r: Vec<Vec<C64>>,
}

impl Frame {
    /// Projects `x` on the frame: returns `(Q†x, x − QQ†x)`.
    fn project(&self, x: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let mut w = x.to_vec();
        let mut coeff = vec![ZERO; self.q.len()];
        for _ in 0..2 {
            for (k, q) in self.q.iter().enumerate() {
                let c = inner(q, &w);
                coeff[k] += c;
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        (coeff, w)
    }

    fn push(&mut self, coeff: Vec<C64>, residual: Vec<C64>) {
        let rn = norm(&residual);
        let mut col = coeff;
        col.push(C64::new(rn, 0.0));
        self.q.push(residual.iter().map(|z| z / rn).collect());
        self.r.push(col);
    }

    /// Solves `R c = coeff` for the least-squares coordinates.
    fn back_substitute(&self, coeff: &[C64]) -> Vec<C64> {
        let n = self.r.len();
        let mut c = coeff.to_vec();
        for i in (0..n).rev() {
            let mut s = c[i];
            for k in i + 1..n {
                s -= self.r[k][i] * c[k];
            }
            c[i] = s / self.r[i][i];
        }
        c
    }

    fn from_kets(kets: &[Vec<C64>]) -> Self {
        let mut f = Frame::default();
        for k in kets {
            let (c, w) = f.project(k);
            f.push(c, w);
        }
        f
    }
}

fn gram_of(kets: &[Vec<C64>]) -> CMatrix {
    let n = kets.len();
    let mut g = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = inner(&kets[j], &kets[k]);
            g[(j, k)] = v;
            g[(k, j)] = v.conj();
        }
        g[(j, j)] = C64::new(g[(j, j)].re, 0.0);
    }
    g
}

/// Certifies linear independence via the singular values of the
/// column-normalized ket matrix.
fn certify(kets: &[Vec<C64>], rank_tol: f64) -> Result<()> {
    let n = kets.len();
    if n == 0 {
        return Ok(());
    }
    let dim = kets[0].len();
    let norms: Vec<f64> = kets.iter().map(|k| norm(k)).collect();
    if let Some(i) = norms.iter().position(|&x| x == 0.0 || !x.is_finite()) {
        return Err(QfimError::RankDeficient {
            indices: vec![i],
            smallest_sigma: 0.0,
        });
    }
    if n > dim {
        return Err(QfimError::RankDeficient {
            indices: (dim..n).collect(),
            smallest_sigma: 0.0,
        });
    }
    let m = CMatrix::from_fn(dim, n, |i, j| kets[j][i] / norms[j]);
    let s = singular_values(&m);
    let ratio = s[n - 1] / s[0];
    if ratio >= rank_tol {
        return Ok(());
    }
    // Name the offending kets: the ket with the smallest residual against its
    // predecessors, plus the predecessors it leans on.
    let mut frame = Frame::default();
    let mut members: Vec<usize> = Vec::new();
    let mut worst: Option<(f64, usize, Vec<C64>, Vec<usize>)> = None;
    for j in 0..n {
        let (coeff, w) = frame.project(m.col(j));
        let rn = norm(&w);
        if j > 0 && worst.as_ref().map_or(true, |(best, ..)| rn < *best) {
            let c = frame.back_substitute(&coeff);
            worst = Some((rn, j, c, members.clone()));
        }
        if rn > 0.0 {
            frame.push(coeff, w);
            members.push(j);
        }
    }
    let (_, j, c, members) = worst.expect("at least two kets when rank deficient");
    let cmax = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut indices: Vec<usize> = c
        .iter()
        .zip(&members)
        .filter(|(z, _)| z.norm() > 1e-3 * cmax)
        .map(|(_, &i)| i)
        .collect();
    indices.push(j);
    Err(QfimError::RankDeficient {
        indices,
        smallest_sigma: ratio,
    })
}

impl BasisSet {
    /// Builds a basis from `kets`, certifying linear independence.
    pub fn new(kets: Vec<Vec<C64>>, support_size: usize, rank_tol: f64) -> Result<Self> {
        if support_size > kets.len() {
            return Err(QfimError::Dimension(format!(
                "support size {support_size} exceeds the {} supplied kets",
                kets.len()
            )));
        }
        let ambient_dim = kets.first().map_or(0, Vec::len);
        if kets.iter().any(|k| k.len() != ambient_dim) {
            return Err(QfimError::Dimension("kets have different lengths".into()));
        }
        certify(&kets, rank_tol)?;
        let gram = gram_of(&kets);
        Ok(Self {
            ambient_dim,
            kets,
            support_size,
            gram,
            rank_tol,
        })
    }

    /// The standard basis of `C^n`.
    pub fn standard(n: usize) -> Self {
        let kets = (0..n)
            .map(|i| {
                let mut e = vec![ZERO; n];
                e[i] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        Self {
            ambient_dim: n,
            kets,
            support_size: n,
            gram: CMatrix::identity(n),
            rank_tol: RANK_TOL,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.support_size
    }

    pub fn kets(&self) -> &[Vec<C64>] {
        &self.kets
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// The support block alone (extensions removed).
    pub fn support(&self) -> BasisSet {
        let kets = self.kets[..self.support_size].to_vec();
        let gram = self.gram.submatrix(0, 0, self.support_size, self.support_size);
        BasisSet {
            ambient_dim: self.ambient_dim,
            kets,
            support_size: self.support_size,
            gram,
            rank_tol: self.rank_tol,
        }
    }

    /// Ambient-dim × len matrix whose columns are the kets.
    pub fn ket_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.ambient_dim, self.len(), |i, j| self.kets[j][i])
    }

    /// Ambient operator `Σ A_jk |ψ_j⟩⟨ψ_k|` for a coefficient matrix `A`.
    pub fn to_ambient(&self, coeffs: &CMatrix) -> Result<CMatrix> {
        if coeffs.rows() != self.len() || coeffs.cols() != self.len() {
            return Err(QfimError::Dimension(format!(
                "{}x{} coefficients for a basis of {} kets",
                coeffs.rows(),
                coeffs.cols(),
                self.len()
            )));
        }
        let k = self.ket_matrix();
        Ok(&(&k * coeffs) * &k.adjoint())
    }

    /// Least-squares coordinates of `x` in this basis and the relative
    /// residual `‖x − Σ c_j ψ_j‖ / ‖x‖`.
    pub fn coords_of(&self, x: &[C64]) -> (Vec<C64>, f64) {
        let frame = Frame::from_kets(&self.kets);
        let (coeff, w) = frame.project(x);
        let xn = norm(x);
        let rel = if xn == 0.0 { 0.0 } else { norm(&w) / xn };
        (frame.back_substitute(&coeff), rel)
    }

    /// Appends `new_kets`, dropping those already inside the running span
    /// (relative residual ≤ `rank_tol`). `support_size` is unchanged.
    pub fn extend(&self, new_kets: &[Vec<C64>], rank_tol: f64) -> Result<Extension> {
        if new_kets.iter().any(|k| k.len() != self.ambient_dim) {
            return Err(QfimError::Dimension(
                "extension ket has the wrong ambient dimension".into(),
            ));
        }
        let mut kets = self.kets.clone();
        let mut frame = Frame::from_kets(&kets);
        // Coordinates are collected against a growing basis and padded at the end.
        let mut raw_coords = Vec::with_capacity(new_kets.len());
        let mut dropped = Vec::new();
        for (idx, x) in new_kets.iter().enumerate() {
            if let Some(pos) = kets.iter().position(|k| k == x) {
                let mut c = vec![ZERO; kets.len()];
                c[pos] = C64::new(1.0, 0.0);
                raw_coords.push(c);
                dropped.push(idx);
                continue;
            }
            let (coeff, w) = frame.project(x);
            let xn = norm(x);
            if xn == 0.0 || norm(&w) <= rank_tol * xn {
                raw_coords.push(frame.back_substitute(&coeff));
                dropped.push(idx);
            } else {
                frame.push(coeff, w);
                kets.push(x.clone());
                let mut c = vec![ZERO; kets.len()];
                c[kets.len() - 1] = C64::new(1.0, 0.0);
                raw_coords.push(c);
            }
        }
        let basis = BasisSet::new(kets, self.support_size, rank_tol)?;
        let n = basis.len();
        let coords = raw_coords
            .into_iter()
            .map(|mut c| {
                c.resize(n, ZERO);
                c
            })
            .collect();
        Ok(Extension {
            basis,
            coords,
            dropped,
        })
    }
}

impl BasisSet {
    /// Like [`BasisSet::extend`], but appends the normalized component of
    /// each new ket orthogonal to the running span instead of the ket itself.
    /// The span is the same; the Gram matrix gains an identity block and no
    /// coupling between support and extension.
    pub fn extend_orthogonal(&self, new_kets: &[Vec<C64>], rank_tol: f64) -> Result<Extension> {
        if new_kets.iter().any(|k| k.len() != self.ambient_dim) {
            return Err(QfimError::Dimension(
                "extension ket has the wrong ambient dimension".into(),
            ));
        }
        let mut kets = self.kets.clone();
        let mut frame = Frame::from_kets(&kets);
        let mut raw_coords = Vec::with_capacity(new_kets.len());
        let mut dropped = Vec::new();
        for (idx, x) in new_kets.iter().enumerate() {
            let (coeff, w) = frame.project(x);
            let xn = norm(x);
            let rn = norm(&w);
            let mut c = frame.back_substitute(&coeff);
            if xn == 0.0 || rn <= rank_tol * xn {
                raw_coords.push(c);
                dropped.push(idx);
                continue;
            }
            let q: Vec<C64> = w.iter().map(|z| z / rn).collect();
            frame.push(vec![ZERO; kets.len()], q.clone());
            kets.push(q);
            c.push(C64::new(rn, 0.0));
            raw_coords.push(c);
        }
        let basis = BasisSet::new(kets, self.support_size, rank_tol)?;
        let n = basis.len();
        let coords = raw_coords
            .into_iter()
            .map(|mut c| {
                c.resize(n, ZERO);
                c
            })
            .collect();
        Ok(Extension {
            basis,
            coords,
            dropped,
        })
    }
}

/// Builds a basis whose first `support_size` kets span the state support.
pub fn build_basis(kets: Vec<Vec<C64>>, support_size: usize, rank_tol: f64) -> Result<BasisSet> {
    BasisSet::new(kets, support_size, rank_tol)
}

pub fn extend_basis(b: &BasisSet, new_kets: &[Vec<C64>], rank_tol: f64) -> Result<BasisSet> {
    Ok(b.extend(new_kets, rank_tol)?.basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_ket(rng: &mut impl Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn orthonormal_kets_have_identity_gram() {
        let b = BasisSet::new(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.0)]], 2, RANK_TOL)
            .unwrap();
        assert!(b.gram().max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn gram_matches_direct_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let kets: Vec<_> = (0..3).map(|_| random_ket(&mut rng, 5)).collect();
        let b = BasisSet::new(kets.clone(), 3, RANK_TOL).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let direct: C64 = kets[j].iter().zip(&kets[k]).map(|(a, b)| a.conj() * b).sum();
                assert!((b.gram()[(j, k)] - direct).norm() < 1e-14);
            }
            assert_eq!(b.gram()[(j, j)].im, 0.0);
            assert!(b.gram()[(j, j)].re > 0.0);
        }
    }

    #[test]
    fn duplicated_ket_is_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_ket(&mut rng, 4);
        let b = random_ket(&mut rng, 4);
        match BasisSet::new(vec![a.clone(), b, a], 3, RANK_TOL) {
            Err(QfimError::RankDeficient { indices, smallest_sigma }) => {
                assert_eq!(indices, vec![0, 2]);
                assert!(smallest_sigma < 1e-14);
            }
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn scaled_copy_is_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let a = random_ket(&mut rng, 3);
        let scaled: Vec<C64> = a.iter().map(|z| z * c(0.0, 3.0)).collect();
        assert!(matches!(
            BasisSet::new(vec![a, scaled], 2, RANK_TOL),
            Err(QfimError::RankDeficient { .. })
        ));
    }

    #[test]
    fn too_many_kets_or_bad_support() {
        let kets = vec![vec![c(1.0, 0.0)], vec![c(2.0, 0.0)]];
        assert!(matches!(BasisSet::new(kets.clone(), 2, RANK_TOL), Err(QfimError::RankDeficient { .. })));
        assert!(matches!(BasisSet::new(kets, 3, RANK_TOL), Err(QfimError::Dimension(_))));
    }

    #[test]
    fn extension_drops_kets_in_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_ket(&mut rng, 4);
        let b = random_ket(&mut rng, 4);
        let base = BasisSet::new(vec![a.clone(), b.clone()], 2, RANK_TOL).unwrap();
        let inside: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * c(0.5, 1.0) - y * 2.0).collect();
        let outside = random_ket(&mut rng, 4);
        let ext = base.extend(&[inside.clone(), outside.clone(), b.clone()], RANK_TOL).unwrap();
        assert_eq!(ext.basis.len(), 3);
        assert_eq!(ext.basis.support_size(), 2);
        assert_eq!(ext.dropped, vec![0, 2]);
        assert!((ext.coords[0][0] - c(0.5, 1.0)).norm() < 1e-12);
        assert!((ext.coords[0][1] - c(-2.0, 0.0)).norm() < 1e-12);
        assert_eq!(ext.coords[0][2], ZERO);
        assert_eq!(ext.coords[1], vec![ZERO, ZERO, c(1.0, 0.0)]);
        assert_eq!(ext.coords[2], vec![ZERO, c(1.0, 0.0), ZERO]);
    }

    #[test]
    fn coords_reconstruct_ket() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let kets: Vec<_> = (0..3).map(|_| random_ket(&mut rng, 6)).collect();
        let b = BasisSet::new(kets.clone(), 3, RANK_TOL).unwrap();
        let x = random_ket(&mut rng, 6);
        let (coords, rel) = b.coords_of(&x);
        let proj: Vec<C64> = (0..6).map(|i| (0..3).map(|j| coords[j] * kets[j][i]).sum()).collect();
        // Least-squares residual is orthogonal to the span.
        let resid: Vec<C64> = x.iter().zip(&proj).map(|(a, b)| a - b).collect();
        for k in &kets {
            assert!(inner(k, &resid).norm() < 1e-12);
        }
        assert!((norm(&resid) / norm(&x) - rel).abs() < 1e-12);
    }
}
