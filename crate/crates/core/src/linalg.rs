// SPDX-License-Identifier: Apache-2.0

//! Dense complex and real matrices for small open-system problems.
//!
//! Everything here is sized for qubit work (dimension ≤ 64): row-major storage,
//! a cyclic Jacobi eigensolver for Hermitian input, and partial-pivoting LU for
//! determinants and inverses.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Largest dimension the kernel is meant for.
pub const MAX_DIM: usize = 64;

/// Hermiticity tolerance accepted by [`eig_hermitian`].
pub const EIG_HERMITIAN_TOL: f64 = 1e-8;

/// Negative eigenvalues below this are a genuine PSD violation.
pub const PSD_REJECT: f64 = -1e-6;

/// Density-matrix tolerances.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
pub const DENSITY_MIN_EIGENVALUE: f64 = -1e-9;

/// Pivot magnitude at or below which an LU factorization is declared singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian (max |M - M^dag| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("matrix is singular (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("density matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("density matrix dimension must be 2 or 4, got {0}")]
    BadDimension(usize),
    #[error("density matrix not Hermitian: residual {residual:e}")]
    NotHermitian { residual: f64 },
    #[error("density matrix trace off by {residual:e}")]
    Trace { residual: f64 },
    #[error("density matrix not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if rows * cols != data.len() {
            return Err(LinalgError::Shape(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a square matrix from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Ok(Self::from_fn(n, cols, |r, c| C64::new(rows[r][c], 0.0)))
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Projector |v⟩⟨v| for a (not necessarily normalized) column vector.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// max |M - M†| entrywise; infinite for non-square input.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// A · B · A†.
    pub fn sandwich(&self, inner: &Self) -> Self {
        &(self * inner) * &self.adjoint()
    }

    fn lu(&self) -> Result<(Vec<C64>, Vec<usize>, bool), LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape("LU needs a square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap_or(col);
            let pivot = a[pivot_row * n + col];
            if pivot.norm() <= SINGULAR_PIVOT {
                return Err(LinalgError::Singular { column: col, pivot: pivot.norm() });
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                }
                perm.swap(col, pivot_row);
                odd = !odd;
            }
            for r in col + 1..n {
                let factor = a[r * n + col] / pivot;
                a[r * n + col] = factor;
                for k in col + 1..n {
                    let upper = a[col * n + k];
                    a[r * n + k] -= factor * upper;
                }
            }
        }
        Ok((a, perm, odd))
    }

    /// Determinant by Gaussian elimination with partial pivoting (no singularity cutoff).
    pub fn det(&self) -> Result<C64, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape("determinant needs a square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap_or(col);
            let pivot = a[pivot_row * n + col];
            if pivot.norm() == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                }
                det = -det;
            }
            det *= pivot;
            for r in col + 1..n {
                let factor = a[r * n + col] / pivot;
                for k in col + 1..n {
                    let upper = a[col * n + k];
                    a[r * n + k] -= factor * upper;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let (a, perm, _) = self.lu()?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for col in 0..n {
            // solve L U x = P e_col
            let mut x: Vec<C64> = (0..n).map(|r| if perm[r] == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect();
            for r in 0..n {
                for k in 0..r {
                    let l = a[r * n + k];
                    x[r] = x[r] - l * x[k];
                }
            }
            for r in (0..n).rev() {
                for k in r + 1..n {
                    let u = a[r * n + k];
                    x[r] = x[r] - u * x[k];
                }
                x[r] /= a[r * n + r];
            }
            for r in 0..n {
                inv[(r, col)] = x[r];
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Row-major dense real matrix, used for transfer matrices and generators.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| C64::new(self[(r, c)], 0.0))
    }

    fn lu(&self) -> Result<(Vec<f64>, Vec<usize>, bool), LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Shape("LU needs a square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
                .unwrap_or(col);
            let pivot = a[pivot_row * n + col];
            if pivot.abs() <= SINGULAR_PIVOT {
                return Err(LinalgError::Singular { column: col, pivot: pivot.abs() });
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                }
                perm.swap(col, pivot_row);
                odd = !odd;
            }
            for r in col + 1..n {
                let factor = a[r * n + col] / pivot;
                a[r * n + col] = factor;
                for k in col + 1..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
            }
        }
        Ok((a, perm, odd))
    }

    /// Determinant by Gaussian elimination with partial pivoting (no singularity cutoff).
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
                .unwrap_or(col);
            let pivot = a[pivot_row * n + col];
            if pivot == 0.0 {
                return 0.0;
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                }
                det = -det;
            }
            det *= pivot;
            for r in col + 1..n {
                let factor = a[r * n + col] / pivot;
                for k in col + 1..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
            }
        }
        det
    }

    /// Inverse; fails with [`LinalgError::Singular`] when a pivot is at or below [`SINGULAR_PIVOT`].
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let (a, perm, _) = self.lu()?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for col in 0..n {
            let mut x: Vec<f64> = (0..n).map(|r| if perm[r] == col { 1.0 } else { 0.0 }).collect();
            for r in 0..n {
                for k in 0..r {
                    x[r] -= a[r * n + k] * x[k];
                }
            }
            for r in (0..n).rev() {
                for k in r + 1..n {
                    x[r] -= a[r * n + k] * x[k];
                }
                x[r] /= a[r * n + r];
            }
            for r in 0..n {
                inv[(r, col)] = x[r];
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &RealMatrix {
    type Output = RealMatrix;
    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = RealMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &RealMatrix {
    type Output = RealMatrix;
    fn add(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &RealMatrix {
    type Output = RealMatrix;
    fn sub(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Pauli matrix σ_index for index 0..=3 (σ₀ = I).
pub fn pauli(index: usize) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let data = match index {
        0 => vec![one, z, z, one],
        1 => vec![z, one, one, z],
        2 => vec![z, -i, i, z],
        3 => vec![one, z, z, -one],
        _ => panic!("Pauli index {index} out of range"),
    };
    ComplexMatrix { rows: 2, cols: 2, data }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// V · diag(f(λ)) · V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = self.vectors[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += vr * self.vectors[(c, k)].conj();
                }
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!("eigensolver needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    let residual = m.hermiticity_residual();
    if residual > EIG_HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { residual });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let off_norm = |a: &ComplexMatrix| {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += a[(p, q)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let scale = a.frobenius_norm();
    let mut converged = scale == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_JACOBI_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if mag == 0.0 {
                    continue;
                }
                if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) || mag <= f64::MIN_POSITIVE {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                let phase_conj = (apq / mag).conj();
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = phase_conj * (-s);
                let u_qq = phase_conj * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
        let off = off_norm(&a);
        converged = !rotated || off <= f64::EPSILON * 1e-2 * scale;
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps, off_norm: off_norm(&a) });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Negative eigenvalues down to [`PSD_REJECT`] are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = eig_hermitian(m)?;
    let min = eig.min_value();
    if min < PSD_REJECT {
        return Err(LinalgError::NotPsd { min_eigenvalue: min });
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Trace norm tr|A| = tr√(A†A) of a Hermitian matrix, i.e. Σ|λ|.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    Ok(eig_hermitian(m)?.values.iter().map(|l| l.abs()).sum())
}

/// Validated qubit or two-qubit density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Pure state |ψ⟩⟨ψ| from a normalized ket.
    pub fn from_ket(ket: &[C64]) -> Result<Self, StateError> {
        validate_density(ComplexMatrix::outer(ket))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Entry (row, col), zero-based.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }
}

/// Checks Hermiticity, unit trace and positivity, reporting the first violated invariant.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityMatrix, StateError> {
    if !m.is_square() {
        return Err(StateError::NotSquare { rows: m.rows, cols: m.cols });
    }
    if m.rows != 2 && m.rows != 4 {
        return Err(StateError::BadDimension(m.rows));
    }
    let residual = m.hermiticity_residual();
    if residual > DENSITY_HERMITIAN_TOL {
        return Err(StateError::NotHermitian { residual });
    }
    let trace_residual = (m.trace() - C64::new(1.0, 0.0)).norm();
    if trace_residual > DENSITY_TRACE_TOL {
        return Err(StateError::Trace { residual: trace_residual });
    }
    let min = eig_hermitian(&m)?.min_value();
    if min < DENSITY_MIN_EIGENVALUE {
        return Err(StateError::NotPsd { min_eigenvalue: min });
    }
    Ok(DensityMatrix { matrix: m })
}
