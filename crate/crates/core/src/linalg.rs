//! Dense symmetric linear algebra.
//!
//! Everything the solvers need from a matrix library lives here: symmetric
//! storage, a blocked Cholesky factorization, SPD inversion and
//! log-determinant through the factor, power-iteration eigenvalue extremes
//! and the `A·M·A` triple product.
//!
//! Matrix products are split into fixed row blocks and dispatched on the
//! ambient rayon pool. The block partition does not depend on the number of
//! threads, so results are bit-identical whether the pool has one thread or
//! many; running inside a single-threaded pool gives strictly sequential
//! evaluation.

use std::fmt;
use std::ops::Index;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Rows per block in the parallel GEMM split and the Cholesky panel width.
const BLOCK: usize = 64;

/// Seed of the deterministic start vector used by power iteration.
const POWER_SEED: u64 = 0x005e_ed0f_9a11;

/// Restarts from a fresh random vector before a zero iterate is taken to
/// mean the operator vanishes.
const POWER_RESTARTS: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric at ({i}, {j}): deviation {deviation:e}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("power iteration did not converge within {max_iter} sweeps")]
    NoConvergence { max_iter: usize },
}

/// Dense symmetric `n × n` matrix in full row-major storage.
///
/// Both triangles are stored and kept exactly mirrored; every constructor
/// either checks or enforces `a[i][j] == a[j][i]`.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds a matrix by evaluating `f(i, j)` on the upper triangle
    /// (`i <= j`) and mirroring it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Builds a matrix from rows, requiring exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Wraps row-major data, requiring exact symmetry.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                // bitwise comparison would reject -0.0 vs 0.0
                if a != b && !(a.is_nan() && b.is_nan()) {
                    return Err(LinalgError::NotSymmetric {
                        i,
                        j,
                        deviation: (a - b).abs(),
                    });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Wraps row-major data that is symmetric up to round-off, replacing each
    /// off-diagonal pair by its average.
    pub fn symmetrized(n: usize, mut data: Vec<f64>) -> Self {
        assert!(n >= 1 && data.len() == n * n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Largest asymmetry `max |a[i][j] - a[j][i]|` of row-major data.
    pub fn max_asymmetry(n: usize, data: &[f64]) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                dev = dev.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        dev
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `a[i][j]` and `a[j][i]`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Entrywise map. Applying the same function to mirrored entries keeps
    /// the result exactly symmetric.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Entrywise combination of two matrices of the same dimension.
    pub fn zip_map(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Frobenius inner product `Σ a[i][j]·b[i][j]`, equal to `Tr(AB)` for
    /// symmetric operands.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn add_diag(&self, shift: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += shift;
        }
        m
    }

    /// `y = A·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Plain (not symmetrized) product `A·B` in row-major order.
    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut c = vec![0.0; n * n];
        gemm(n, n, n, &self.data, &other.data, n as isize, 1, &mut c);
        c
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix {}x{} [", self.n, self.n)?;
        for row in self.data.chunks(self.n) {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

/// `C = A·B` where `A` is `rows × inner` row-major and `B` is addressed by
/// the given row/column strides. Rows of `C` are produced in fixed blocks.
#[allow(clippy::too_many_arguments)]
fn gemm(
    rows: usize,
    inner: usize,
    cols: usize,
    a: &[f64],
    b: &[f64],
    rsb: isize,
    csb: isize,
    c: &mut [f64],
) {
    debug_assert_eq!(a.len(), rows * inner);
    debug_assert_eq!(c.len(), rows * cols);
    c.par_chunks_mut(BLOCK * cols)
        .enumerate()
        .for_each(|(blk, c_blk)| {
            let r0 = blk * BLOCK;
            let nr = c_blk.len() / cols;
            let a_blk = &a[r0 * inner..(r0 + nr) * inner];
            // SAFETY: `a_blk` is nr × inner row-major, `b` covers every
            // (k, j) addressed through the caller's strides, and `c_blk` is
            // an exclusive nr × cols row-major slice.
            unsafe {
                matrixmultiply::dgemm(
                    nr,
                    inner,
                    cols,
                    1.0,
                    a_blk.as_ptr(),
                    inner as isize,
                    1,
                    b.as_ptr(),
                    rsb,
                    csb,
                    0.0,
                    c_blk.as_mut_ptr(),
                    cols as isize,
                    1,
                );
            }
        });
}

/// Below this fraction of nonzeros `A·M·A` takes the sparse path.
const SPARSE_DENSITY: f64 = 0.1;

/// `A·M·A`, symmetrized to remove round-off asymmetry.
///
/// Sparse `A` (the usual case for graphical-lasso iterates) is handled by
/// row-wise accumulation over its nonzeros, dense `A` by two GEMMs.
pub fn sym_triple_product(a: &SymMatrix, m: &SymMatrix) -> SymMatrix {
    assert_eq!(a.n, m.n, "dimension mismatch");
    let n = a.n;
    let nnz = a.data.iter().filter(|&&v| v != 0.0).count();
    let ama = if (nnz as f64) < SPARSE_DENSITY * (n * n) as f64 {
        sparse_triple_product(a, m)
    } else {
        let am = a.matmul(m);
        let mut ama = vec![0.0; n * n];
        gemm(n, n, n, &am, &a.data, n as isize, 1, &mut ama);
        ama
    };
    SymMatrix::symmetrized(n, ama)
}

fn sparse_triple_product(a: &SymMatrix, m: &SymMatrix) -> Vec<f64> {
    let n = a.n;
    let rows: Vec<Vec<(usize, f64)>> = a
        .data
        .chunks(n)
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(k, &v)| (k, v))
                .collect()
        })
        .collect();
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each_init(
        || vec![0.0; n],
        |p, (i, out_row)| {
            // p = row i of A·M
            p.iter_mut().for_each(|x| *x = 0.0);
            for &(k, aik) in &rows[i] {
                p.iter_mut().zip(m.row(k)).for_each(|(x, mk)| *x += aik * mk);
            }
            // row i of (A·M)·A = Σ_k p[k]·(row k of A)
            for (k, &pk) in p.iter().enumerate() {
                if pk != 0.0 {
                    for &(j, akj) in &rows[k] {
                        out_row[j] += pk * akj;
                    }
                }
            }
        },
    );
    out
}

/// Cholesky failure: the pivot at `pivot` fell to `value`, at or below the
/// acceptance threshold.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("not positive definite: pivot {pivot} is {value:e}")]
pub struct NotPositiveDefinite {
    pub pivot: usize,
    pub value: f64,
}

/// Lower-triangular factor `L` with `A = L·Lᵀ`.
#[derive(Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    /// Row-major; entries above the diagonal are zero.
    lower: Vec<f64>,
}

impl fmt::Debug for CholeskyFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CholeskyFactor")
            .field("n", &self.n)
            .field("diag", &self.diag())
            .finish()
    }
}

/// Factorizes `a = L·Lᵀ`.
///
/// A pivot `≤ n·ε·max(diag(a))` is treated as a failure, so numerically
/// indefinite matrices are rejected rather than factorized with garbage.
pub fn cholesky(a: &SymMatrix) -> Result<CholeskyFactor, NotPositiveDefinite> {
    let n = a.n;
    let max_diag = a.diag().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let threshold = (n as f64 * f64::EPSILON * max_diag).max(0.0);
    let mut w = a.data.clone();

    let mut k0 = 0;
    while k0 < n {
        let kb = BLOCK.min(n - k0);
        let k1 = k0 + kb;

        // diagonal block, unblocked; earlier blocks are already folded in
        for j in k0..k1 {
            let (row_j, _) = w[j * n..].split_at(n);
            let sj: f64 = dot(&row_j[k0..j], &row_j[k0..j]);
            let d = w[j * n + j] - sj;
            if d.is_nan() || d <= threshold {
                return Err(NotPositiveDefinite { pivot: j, value: d });
            }
            let ljj = d.sqrt();
            w[j * n + j] = ljj;
            for i in (j + 1)..k1 {
                let s = dot(&w[i * n + k0..i * n + j], &w[j * n + k0..j * n + j]);
                w[i * n + j] = (w[i * n + j] - s) / ljj;
            }
        }

        if k1 < n {
            // panel below the diagonal block: X·L11ᵀ = A21
            let (head, tail) = w.split_at_mut(k1 * n);
            let diag_block = &head[k0 * n..];
            tail.par_chunks_mut(n).for_each(|row| {
                for j in k0..k1 {
                    let s = dot(&row[k0..j], &diag_block[(j - k0) * n + k0..(j - k0) * n + j]);
                    row[j] = (row[j] - s) / diag_block[(j - k0) * n + j];
                }
            });

            // trailing update A22 -= L21·L21ᵀ, lower block-triangle only
            let mut r0 = k1;
            while r0 < n {
                let nr = BLOCK.min(n - r0);
                let cols = r0 + nr - k1;
                // SAFETY: reads columns k0..k1 of rows k1..r0+nr and writes
                // columns k1..r0+nr of rows r0..r0+nr; the regions are disjoint
                // and all lie inside the n × n buffer.
                unsafe {
                    let base = w.as_mut_ptr();
                    matrixmultiply::dgemm(
                        nr,
                        kb,
                        cols,
                        -1.0,
                        base.add(r0 * n + k0),
                        n as isize,
                        1,
                        base.add(k1 * n + k0),
                        1,
                        n as isize,
                        1.0,
                        base.add(r0 * n + k1),
                        n as isize,
                        1,
                    );
                }
                r0 += nr;
            }
        }
        k0 = k1;
    }

    for i in 0..n {
        for j in (i + 1)..n {
            w[i * n + j] = 0.0;
        }
    }
    Ok(CholeskyFactor { n, lower: w })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four independent accumulators let the compiler vectorize
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

impl CholeskyFactor {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major lower triangle.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `log det(A) = 2·Σ log L[i][i]`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        gemm(n, n, n, &self.lower, &self.lower, 1, n as isize, &mut c);
        SymMatrix::symmetrized(n, c)
    }

    /// Solves `L·y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "dimension mismatch");
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.lower[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.lower[i * n + i];
        }
        y
    }

    /// Solves `Lᵀ·x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n, "dimension mismatch");
        let n = self.n;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.lower[i * n + i];
            let xi = x[i];
            // column i of L below the diagonal is row i of Lᵀ
            for k in 0..i {
                x[k] -= self.lower[i * n + k] * xi;
            }
        }
        x
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L⁻¹`, lower triangular, row-major, by blocked forward substitution.
    fn lower_inverse(&self) -> Vec<f64> {
        let n = self.n;
        let l = &self.lower;
        let mut x = vec![0.0; n * n];
        let mut i0 = 0;
        while i0 < n {
            let i1 = (i0 + BLOCK).min(n);
            let nr = i1 - i0;
            let (done, rest) = x.split_at_mut(i0 * n);
            let blk = &mut rest[..nr * n];
            if i0 > 0 {
                // X[I, 0..i0] = −L[I, 0..i0]·X[0..i0, 0..i0]
                // SAFETY: reads rows I of L and the finished rows of X,
                // writes columns 0..i0 of the exclusive block rows.
                unsafe {
                    matrixmultiply::dgemm(
                        nr,
                        i0,
                        i0,
                        -1.0,
                        l.as_ptr().add(i0 * n),
                        n as isize,
                        1,
                        done.as_ptr(),
                        n as isize,
                        1,
                        0.0,
                        blk.as_mut_ptr(),
                        n as isize,
                        1,
                    );
                }
            }
            for r in 0..nr {
                blk[r * n + i0 + r] = 1.0;
            }
            // forward substitution with the diagonal block L[I, I]
            for r in 0..nr {
                let (above, row) = blk.split_at_mut(r * n);
                let row = &mut row[..i1];
                for q in 0..r {
                    let lrq = l[(i0 + r) * n + i0 + q];
                    if lrq != 0.0 {
                        row.iter_mut()
                            .zip(&above[q * n..q * n + i1])
                            .for_each(|(x, y)| *x -= lrq * y);
                    }
                }
                let d = l[(i0 + r) * n + i0 + r];
                row.iter_mut().for_each(|x| *x /= d);
            }
            i0 = i1;
        }
        x
    }

    /// `A⁻¹ = L⁻ᵀ·L⁻¹`.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.n;
        let x = self.lower_inverse();
        // W[a][b] = Σ_{i ≥ max(a, b)} X[i][a]·X[i][b]; each row block only
        // needs columns and inner indices from its first row on
        let mut w = vec![0.0; n * n];
        w.par_chunks_mut(BLOCK * n).enumerate().for_each(|(blk, w_blk)| {
            let a0 = blk * BLOCK;
            let nr = w_blk.len() / n;
            let width = n - a0;
            // SAFETY: reads rows and columns a0..n of `x` and writes columns
            // a0..n of the exclusive row block `w_blk`.
            unsafe {
                let base = x.as_ptr().add(a0 * n + a0);
                matrixmultiply::dgemm(
                    nr,
                    width,
                    width,
                    1.0,
                    base,
                    1,
                    n as isize,
                    base,
                    n as isize,
                    1,
                    0.0,
                    w_blk.as_mut_ptr().add(a0),
                    n as isize,
                    1,
                );
            }
        });
        for i in 0..n {
            for j in (i + 1)..n {
                w[j * n + i] = w[i * n + j];
            }
        }
        SymMatrix { n, data: w }
    }
}

/// `A⁻¹` from a Cholesky factor.
pub fn spd_inverse(f: &CholeskyFactor) -> SymMatrix {
    f.inverse()
}

pub fn log_det(f: &CholeskyFactor) -> f64 {
    f.log_det()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigExtremes {
    pub min: f64,
    pub max: f64,
}

/// Default power-iteration tolerance on the Rayleigh quotient.
pub const EIG_TOL: f64 = 1e-6;

/// Default sweep budget, `10·n` but at least 1000.
pub fn eig_default_max_iter(n: usize) -> usize {
    (10 * n).max(1000)
}

/// Extreme eigenvalues by power iteration.
///
/// For positive definite input, `λ_max` comes from power iteration on `A`
/// and `λ_min` from inverse iteration through the Cholesky factor. Otherwise
/// `λ_max` comes from power iteration on `A + r·I` (`r` the Gershgorin
/// radius, which makes the operator PSD so the dominant eigenvalue is the
/// algebraically largest) and `λ_min` from power iteration on
/// `λ_max·I − A`.
///
/// Convergence is declared when the Rayleigh quotient changes by at most
/// `tol` relative between sweeps.
pub fn eig_extremes(a: &SymMatrix, tol: f64, max_iter: usize) -> Result<EigExtremes, LinalgError> {
    let n = a.n;
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    match cholesky(a) {
        Ok(factor) => {
            let max = dominant_eigenvalue(n, tol, max_iter, &mut rng, |x| a.mul_vec(x))?;
            let inv_min = dominant_eigenvalue(n, tol, max_iter, &mut rng, |x| factor.solve(x))?;
            Ok(EigExtremes {
                min: 1.0 / inv_min,
                max,
            })
        }
        Err(_) => {
            let radius = (0..n)
                .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            let shifted = dominant_eigenvalue(n, tol, max_iter, &mut rng, |x| {
                let mut y = a.mul_vec(x);
                y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += radius * xi);
                y
            })?;
            let max = shifted - radius;
            let gap = dominant_eigenvalue(n, tol, max_iter, &mut rng, |x| {
                let mut y = a.mul_vec(x);
                y.iter_mut().zip(x).for_each(|(yi, xi)| *yi = max * xi - *yi);
                y
            })?;
            Ok(EigExtremes { min: max - gap, max })
        }
    }
}

/// `λ_max / λ_min` of a positive definite matrix.
pub fn condition_estimate(a: &SymMatrix) -> Result<f64, LinalgError> {
    if cholesky(a).is_err() {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let e = eig_extremes(a, EIG_TOL, eig_default_max_iter(a.n))?;
    Ok(e.max / e.min)
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
            return x;
        }
    }
}

/// Dominant eigenvalue (largest magnitude) of a symmetric operator.
fn dominant_eigenvalue(
    n: usize,
    tol: f64,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
    apply: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<f64, LinalgError> {
    let mut x = random_unit(n, rng);
    let mut restarts = 0;
    let mut prev: Option<f64> = None;
    for _ in 0..max_iter.max(2) {
        let y = apply(&x);
        let theta: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            // stagnation: the iterate fell into the null space
            if restarts == POWER_RESTARTS || !norm.is_finite() {
                return if norm == 0.0 {
                    Ok(0.0)
                } else {
                    Err(LinalgError::NoConvergence { max_iter })
                };
            }
            restarts += 1;
            x = random_unit(n, rng);
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            if (theta - p).abs() <= tol * theta.abs() {
                return Ok(theta);
            }
        }
        prev = Some(theta);
        x = y.into_iter().map(|v| v / norm).collect();
    }
    Err(LinalgError::NoConvergence { max_iter })
}
