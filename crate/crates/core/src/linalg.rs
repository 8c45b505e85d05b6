//! Small dense complex linear algebra.
//!
//! Matrices here are at most a few dozen rows (the largest is the 4N-mode
//! optical unitary at N = 16), so everything is plain row-major storage and
//! cyclic Jacobi sweeps for spectra.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{re, Real};

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let diag: Vec<_> = diag.iter().map(|&d| re(d)).collect();
        Self::from_diag(&diag)
    }

    /// Builds a matrix from a function of `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[StateVector<T>]) -> Self {
        let rows = columns.first().map_or(0, |c| c.len());
        Self::from_fn(rows, columns.len(), |i, j| columns[j].amplitudes()[i])
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &StateVector<T>, b: &StateVector<T>) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a.amplitudes()[i] * b.amplitudes()[j].conj())
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

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> StateVector<T> {
        StateVector::new_unchecked((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn matvec(&self, v: &StateVector<T>) -> StateVector<T> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let out = (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v.amplitudes())
                    .fold(Complex::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect();
        StateVector::new_unchecked(out)
    }

    /// Integer power of a square matrix.
    pub fn pow(&self, exp: usize) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..exp {
            out = &out * self;
        }
        out
    }

    /// Block matrix `[[a, b], [c, d]]` from four equally sized square blocks.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let n = a.rows;
        for m in [b, c, d] {
            assert_eq!((m.rows, m.cols), (n, n), "block2 needs equal square blocks");
        }
        Self::from_fn(2 * n, 2 * n, |i, j| {
            let blk = match (i < n, j < n) {
                (true, true) => a,
                (true, false) => b,
                (false, true) => c,
                (false, false) => d,
            };
            blk[(i % n, j % n)]
        })
    }

    /// Sub-block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc.max(x.norm()))
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> T {
        singular_values(self).into_iter().fold(T::zero(), T::max)
    }

    /// `‖A†A − I‖` in operator norm.
    pub fn unitarity_defect(&self) -> T {
        let gram = &self.adjoint() * self;
        (&gram - &Self::identity(self.cols)).operator_norm()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && (self - &self.adjoint()).max_abs() <= tol
    }

    /// Applies a 2×2 unitary to rows `i` and `j` in place (`M ← G·M` on that pair).
    pub fn rotate_rows(&mut self, i: usize, j: usize, g: &[[Complex<T>; 2]; 2]) {
        for k in 0..self.cols {
            let a = self[(i, k)];
            let b = self[(j, k)];
            self[(i, k)] = g[0][0] * a + g[0][1] * b;
            self[(j, k)] = g[1][0] * a + g[1][1] * b;
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

/// Complex amplitude vector over a finite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes after checking unit norm at construction tolerance.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let v = Self { amplitudes };
        let norm_sq = v.norm_sqr();
        if (norm_sq - T::one()).abs() > T::construction_tol() {
            return Err(Error::NotNormalized {
                sum_sq: norm_sq.to_f64_lossy(),
            });
        }
        Ok(v)
    }

    /// Wraps amplitudes with no normalization check (unnormalized branches, columns).
    pub fn new_unchecked(amplitudes: Vec<Complex<T>>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex::zero(); dim];
        amplitudes[index] = Complex::one();
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.len(), other.len(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self::new_unchecked(self.amplitudes.iter().map(|&a| a * s).collect())
    }

    /// Unit vector in the same direction, or `None` for a (numerically) zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= T::epsilon() {
            return None;
        }
        Some(self.scaled(re(n.recip())))
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Largest componentwise deviation.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Equality up to a global phase, judged by `|⟨a|b⟩| ≈ ‖a‖‖b‖`.
    pub fn equal_up_to_phase(&self, other: &Self, tol: T) -> bool {
        (self.inner(other).norm() - self.norm() * other.norm()).abs() <= tol
    }
}

/// Unitary 2×2 rotation that diagonalizes the Hermitian block `[[a, z], [z*, b]]`.
///
/// Returns `G` such that `G† B G` is diagonal, or `None` when `z` is already
/// negligible.
fn jacobi_rotation<T: Real>(a: T, b: T, z: Complex<T>) -> Option<[[Complex<T>; 2]; 2]> {
    let r = z.norm();
    if r <= T::min_positive_value() {
        return None;
    }
    let phase = z.unscale(r);
    let two = T::one() + T::one();
    let theta = (two * r).atan2(b - a) / two;
    let (s, c) = theta.sin_cos();
    let pc = phase.conj();
    Some([[re(c), re(s)], [-pc * re(s), pc * re(c)]])
}

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.clone();
    let scale = a.frobenius_norm().max(T::min_positive_value());
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= T::epsilon() * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let Some(g) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, a[(p, q)]) else {
                    continue;
                };
                // A ← G† A G restricted to the (p, q) plane.
                for k in 0..n {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    a[(k, p)] = x * g[0][0] + y * g[1][0];
                    a[(k, q)] = x * g[0][1] + y * g[1][1];
                }
                for k in 0..n {
                    let x = a[(p, k)];
                    let y = a[(q, k)];
                    a[(p, k)] = g[0][0].conj() * x + g[1][0].conj() * y;
                    a[(q, k)] = g[0][1].conj() * x + g[1][1].conj() * y;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eig)
}

/// Singular values by one-sided (Hestenes) Jacobi, descending.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    // Work on columns; transpose wide matrices so there are at most `rows` columns.
    let work = if m.cols() > m.rows() { m.adjoint() } else { m.clone() };
    let (rows, cols) = (work.rows(), work.cols());
    let mut colv: Vec<Vec<Complex<T>>> = (0..cols)
        .map(|j| (0..rows).map(|i| work[(i, j)]).collect())
        .collect();
    let dot = |x: &[Complex<T>], y: &[Complex<T>]| {
        x.iter().zip(y).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    };
    let nsq = |x: &[Complex<T>]| x.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = nsq(&colv[p]);
                let beta = nsq(&colv[q]);
                let gamma = dot(&colv[p], &colv[q]);
                if gamma.norm() <= T::epsilon() * (alpha * beta).sqrt() {
                    continue;
                }
                let Some(g) = jacobi_rotation(alpha, beta, gamma) else {
                    continue;
                };
                rotated = true;
                for k in 0..rows {
                    let x = colv[p][k];
                    let y = colv[q][k];
                    colv[p][k] = x * g[0][0] + y * g[1][0];
                    colv[q][k] = x * g[0][1] + y * g[1][1];
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = colv.iter().map(|c| nsq(c).sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    sv
}

/// Number of singular values above `threshold`.
pub fn numerical_rank<T: Real>(m: &CMatrix<T>, threshold: T) -> usize {
    singular_values(m).into_iter().filter(|&s| s > threshold).count()
}
