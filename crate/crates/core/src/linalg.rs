//! Dense complex matrix kernel.
//!
//! [`CMatrix`] stores its entries in **column-major** order: entry `(i, j)`
//! lives at `data[i + j * rows]`. With that layout `vec(A)` (columns stacked
//! on top of each other) is just the entry buffer, and `mat(v, n)` is the
//! inverse reinterpretation.
//!
//! Block operations (`vecb`, Tracy–Singh products) work on a 2×2 block layout
//! described by a [`BlockPartition`]: block `11` is `row_split × col_split`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QfimError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default relative tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default reciprocal-condition cutoff below which a solve is rejected.
pub const SOLVE_TOL: f64 = 1e-12;

/// Dense complex matrix, column-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, " {:+.6e}{:+.6e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(QfimError::Dimension(format!(
                "buffer of length {} cannot hold a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Column vector (n×1).
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major entry buffer.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max|A − A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for j in 0..self.cols {
            for i in 0..=j {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian within `tol · max|A|`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.max_abs()
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(QfimError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b == ZERO {
                    continue;
                }
                let a_col = self.col(k);
                let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
                for (o, a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(QfimError::Dimension(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![ZERO; self.rows];
        for (k, &b) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.col(k)) {
                *o += a * b;
            }
        }
        Ok(out)
    }

    /// Copy of the sub-matrix `[r0, r0+nr) × [c0, c0+nc)`.
    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> CMatrix {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        CMatrix::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for j in 0..block.cols {
            for i in 0..block.rows {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Embeds `self` in the top-left corner of an `n×m` zero matrix.
    pub fn padded(&self, n: usize, m: usize) -> CMatrix {
        let mut out = CMatrix::zeros(n, m);
        out.set_submatrix(0, 0, self);
        out
    }

    /// One of the four blocks of `self` under partition `p` (`bi, bj ∈ {0, 1}`).
    pub fn block(&self, p: BlockPartition, bi: usize, bj: usize) -> CMatrix {
        let (r0, nr) = if bi == 0 {
            (0, p.row_split)
        } else {
            (p.row_split, self.rows - p.row_split)
        };
        let (c0, nc) = if bj == 0 {
            (0, p.col_split)
        } else {
            (p.col_split, self.cols - p.col_split)
        };
        self.submatrix(r0, c0, nr, nc)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.as_slice().to_vec(),
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    /// Panics on shape mismatch; use [`CMatrix::matmul`] for a fallible product.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale(-ONE)
    }
}

/// Split points of a 2×2 block layout. Block `11` is `row_split × col_split`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    pub row_split: usize,
    pub col_split: usize,
}

impl BlockPartition {
    pub fn new(row_split: usize, col_split: usize) -> Self {
        Self {
            row_split,
            col_split,
        }
    }

    /// Single-block layout for an `rows × cols` matrix.
    pub fn trivial(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols)
    }

    pub fn transposed(self) -> Self {
        Self::new(self.col_split, self.row_split)
    }

    pub fn check(self, m: &CMatrix) -> Result<()> {
        if self.row_split > m.rows() || self.col_split > m.cols() {
            return Err(QfimError::PartitionOutOfRange {
                row_split: self.row_split,
                col_split: self.col_split,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        Ok(())
    }

    fn row_ranges(self, rows: usize) -> [(usize, usize); 2] {
        [(0, self.row_split), (self.row_split, rows - self.row_split)]
    }

    fn col_ranges(self, cols: usize) -> [(usize, usize); 2] {
        [(0, self.col_split), (self.col_split, cols - self.col_split)]
    }
}

/// Stacks the columns of `m`.
pub fn vec(m: &CMatrix) -> Vec<C64> {
    m.data.clone()
}

/// Inverse of [`vec`] for square matrices: fills columns first.
pub fn mat(v: &[C64], n: usize) -> Result<CMatrix> {
    if v.len() != n * n {
        return Err(QfimError::Dimension(format!(
            "vector of length {} cannot be reshaped to {n}x{n}",
            v.len()
        )));
    }
    CMatrix::from_col_major(n, n, v.to_vec())
}

/// Block-wise vectorization: `vec(A11), vec(A21), vec(A12), vec(A22)`.
pub fn vecb(m: &CMatrix, p: BlockPartition) -> Result<Vec<C64>> {
    p.check(m)?;
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for bj in 0..2 {
        for bi in 0..2 {
            out.extend_from_slice(m.block(p, bi, bj).as_slice());
        }
    }
    Ok(out)
}

/// Inverse of [`vecb`] for an `rows × cols` matrix with partition `p`.
pub fn matb(v: &[C64], rows: usize, cols: usize, p: BlockPartition) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(QfimError::Dimension(format!(
            "vector of length {} does not fit {rows}x{cols}",
            v.len()
        )));
    }
    let mut out = CMatrix::zeros(rows, cols);
    p.check(&out)?;
    let mut offset = 0;
    for (c0, nc) in p.col_ranges(cols) {
        for (r0, nr) in p.row_ranges(rows) {
            let block = CMatrix::from_col_major(nr, nc, v[offset..offset + nr * nc].to_vec())?;
            out.set_submatrix(r0, c0, &block);
            offset += nr * nc;
        }
    }
    Ok(out)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows(), b.cols());
    CMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Tracy–Singh product: the block grid whose row blocks run over
/// `(A row block i, B row block k)` and column blocks over
/// `(A col block j, B col block l)`, both in lexicographic order, with block
/// `A_ij ⊗ B_kl`. Empty blocks contribute nothing.
pub fn tracy_singh(
    a: &CMatrix,
    pa: BlockPartition,
    b: &CMatrix,
    pb: BlockPartition,
) -> Result<CMatrix> {
    pa.check(a)?;
    pb.check(b)?;
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    let mut r0 = 0;
    for (ar, anr) in pa.row_ranges(a.rows()) {
        for (br, bnr) in pb.row_ranges(b.rows()) {
            let mut c0 = 0;
            for (ac, anc) in pa.col_ranges(a.cols()) {
                for (bc, bnc) in pb.col_ranges(b.cols()) {
                    let blk = kron(&a.submatrix(ar, ac, anr, anc), &b.submatrix(br, bc, bnr, bnc));
                    out.set_submatrix(r0, c0, &blk);
                    c0 += anc * bnc;
                }
            }
            r0 += anr * bnr;
        }
    }
    Ok(out)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    norm_1: f64,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(QfimError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                continue;
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            norm_1: a.norm_1(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    fn has_zero_pivot(&self) -> bool {
        (0..self.dim()).any(|k| self.lu[(k, k)] == ZERO)
    }

    /// Solves `A x = b`. Division by a zero pivot yields non-finite values.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s / self.lu[(i, i)];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `A† x = b`.
    pub fn solve_adjoint_in_place(&self, b: &mut [C64]) {
        let n = self.dim();
        // A† = U† L† P, so solve U† y = b, L† z = y, then x = Pᵀ z.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.lu[(k, i)].conj() * y[k];
            }
            y[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.lu[(k, i)].conj() * y[k];
            }
            y[i] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = y[i];
        }
    }

    /// Hager–Higham estimate of `‖A⁻¹‖₁`.
    fn inverse_norm_1_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            self.solve_in_place(&mut x);
            let new_est: f64 = x.iter().map(|z| z.norm()).sum();
            if !new_est.is_finite() {
                return f64::INFINITY;
            }
            if new_est <= est && last_j != usize::MAX {
                break;
            }
            est = new_est;
            let mut z: Vec<C64> = x
                .iter()
                .map(|&v| {
                    let r = v.norm();
                    if r == 0.0 {
                        ONE
                    } else {
                        v / r
                    }
                })
                .collect();
            self.solve_adjoint_in_place(&mut z);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if j == last_j || zmax <= z.iter().map(|v| v.norm()).sum::<f64>() / n as f64 {
                break;
            }
            last_j = j;
            x = vec![ZERO; n];
            x[j] = ONE;
        }
        // Higham's alternating-sign safeguard.
        let mut alt: Vec<C64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(sign * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        self.solve_in_place(&mut alt);
        let alt_est = 2.0 * alt.iter().map(|z| z.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }

    /// 1-norm condition estimate `‖A‖₁·‖A⁻¹‖₁` (infinite for exact singularity).
    pub fn condition_estimate(&self) -> f64 {
        if self.has_zero_pivot() {
            return f64::INFINITY;
        }
        self.norm_1 * self.inverse_norm_1_estimate()
    }
}

/// Solution of a linear system together with the 1-norm condition estimate.
#[derive(Debug, Clone)]
pub struct Solved<T> {
    pub value: T,
    pub condition: f64,
}

pub(crate) fn check_condition(lu: &Lu, solve_tol: f64) -> Result<f64> {
    let cond = lu.condition_estimate();
    if !cond.is_finite() || 1.0 / cond < solve_tol {
        return Err(QfimError::SingularMatrix { condition: cond });
    }
    Ok(cond)
}

/// Solves `a x = rhs`, rejecting systems whose reciprocal condition is below `solve_tol`.
pub fn solve_with_tol(a: &CMatrix, rhs: &[C64], solve_tol: f64) -> Result<Solved<Vec<C64>>> {
    if rhs.len() != a.rows() {
        return Err(QfimError::Dimension(format!(
            "right-hand side of length {} for a {}x{} system",
            rhs.len(),
            a.rows(),
            a.cols()
        )));
    }
    let lu = Lu::factor(a)?;
    let condition = check_condition(&lu, solve_tol)?;
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(Solved {
        value: x,
        condition,
    })
}

pub fn solve(a: &CMatrix, rhs: &[C64]) -> Result<Solved<Vec<C64>>> {
    solve_with_tol(a, rhs, SOLVE_TOL)
}

/// Solves `a X = b` for a matrix right-hand side.
pub fn solve_matrix_with_tol(a: &CMatrix, b: &CMatrix, solve_tol: f64) -> Result<Solved<CMatrix>> {
    if b.rows() != a.rows() {
        return Err(QfimError::Dimension(format!(
            "right-hand side with {} rows for a {}x{} system",
            b.rows(),
            a.rows(),
            a.cols()
        )));
    }
    let lu = Lu::factor(a)?;
    let condition = check_condition(&lu, solve_tol)?;
    let mut data = b.as_slice().to_vec();
    for col in data.chunks_mut(b.rows().max(1)) {
        lu.solve_in_place(col);
    }
    Ok(Solved {
        value: CMatrix::from_col_major(b.rows(), b.cols(), data)?,
        condition,
    })
}

/// Matrix inverse, column by column.
pub fn inv_with_tol(a: &CMatrix, solve_tol: f64) -> Result<Solved<CMatrix>> {
    let lu = Lu::factor(a)?;
    let condition = check_condition(&lu, solve_tol)?;
    let n = a.rows();
    let mut data = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = ONE;
        lu.solve_in_place(&mut e);
        data.extend(e);
    }
    Ok(Solved {
        value: CMatrix::from_col_major(n, n, data)?,
        condition,
    })
}

pub fn inv(a: &CMatrix) -> Result<Solved<CMatrix>> {
    inv_with_tol(a, SOLVE_TOL)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

pub fn eig_hermitian_with_tol(a: &CMatrix, hermitian_tol: f64) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(QfimError::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_hermitian(hermitian_tol) {
        return Err(QfimError::NotHermitian {
            deviation: a.hermitian_deviation(),
        });
    }
    let n = a.rows();
    let eig = nalgebra::SymmetricEigen::new(a.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let raw = CMatrix::from_nalgebra(&eig.eigenvectors);
    let vectors = CMatrix::from_fn(n, n, |i, j| raw[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

pub fn eig_hermitian(a: &CMatrix) -> Result<HermitianEigen> {
    eig_hermitian_with_tol(a, HERMITIAN_TOL)
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let svd = a.to_nalgebra().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `Σ conj(u_i) v_i`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
