//! Dense complex linear algebra used by every measure.
//!
//! `ComplexMatrix` wraps an `nalgebra::DMatrix<Complex64>`; the decompositions
//! here add the ordering, clamping and validation conventions the rest of the
//! crate relies on (eigenvalues and singular values always decreasing).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{DensityMatrix, TripartitePureState};
use crate::tolerances;

const EIG_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 10_000;

pub type C64 = Complex64;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    /// Real-valued convenience constructor, row-major. Panics on a length mismatch.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        Self(DMatrix::from_row_iterator(
            rows,
            cols,
            entries.iter().map(|&x| c64(x, 0.0)),
        ))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(
            n,
            n,
            |i, j| if i == j { c64(diag[i], 0.0) } else { C64::ZERO },
        )
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance to `other`. Panics if the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows(), self.cols()),
            (other.rows(), other.cols()),
            "shape mismatch"
        );
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entry of `|m - m^dagger|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows())) <= tol
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Nonnegative values sorted in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum(Vec<f64>);

impl SingularSpectrum {
    /// Sorts decreasing; negative or non-finite input is rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NumericalFailure(format!(
                "invalid singular values {values:?}"
            )));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries below `floor` become exactly zero.
    pub fn floored(mut self, floor: f64) -> Self {
        for v in &mut self.0 {
            if *v < floor {
                *v = 0.0;
            }
        }
        self
    }

    /// Keeps the `rank` largest values; the rest become zero.
    pub fn truncated(mut self, rank: usize) -> Self {
        for v in self.0.iter_mut().skip(rank) {
            *v = 0.0;
        }
        self
    }

    /// `(sum_i sqrt(s_i))^2`
    pub fn sqrt_sum_squared(&self) -> f64 {
        let s: f64 = self.0.iter().map(|v| v.sqrt()).sum();
        s * s
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `sum_{i != j} sqrt(s_i s_j)` over ordered pairs, evaluated pairwise.
    pub fn ordered_pair_cross_sum(&self) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in self.0.iter().enumerate() {
                if i != j {
                    acc += (a * b).sqrt();
                }
            }
        }
        acc
    }

    /// Max entrywise distance; spectra of different length are zero-padded.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|i| {
                let a = self.0.get(i).copied().unwrap_or(0.0);
                let b = other.0.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    /// Decreasing.
    pub eigenvalues: Vec<f64>,
    /// Columns are the orthonormal eigenvectors, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    /// `Phi diag(lambda) Phi^dagger`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_real_diagonal(&self.eigenvalues);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }

    /// Rebuilds with each eigenvalue mapped through `f`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let d = ComplexMatrix::from_real_diagonal(&mapped);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues decreasing.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    m.require_square()?;
    let deviation = m.hermiticity_defect();
    if deviation > tolerances::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    // Exact symmetrization so the solver sees a Hermitian matrix.
    let sym = (m.as_nalgebra() + m.as_nalgebra().adjoint()) * c64(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, EIG_EPS, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;

    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Singular values, decreasing; `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Result<SingularSpectrum> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let svd =
        nalgebra::linalg::SVD::try_new(m.as_nalgebra().clone(), false, false, EIG_EPS, MAX_SWEEPS)
            .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    SingularSpectrum::new(svd.singular_values.iter().map(|v| v.max(0.0)).collect())
}

/// Principal square root of a PSD Hermitian matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything lower is `NotPsd`.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    check_psd(&eig.eigenvalues)?;
    Ok(eig.map_eigenvalues(|l| l.max(0.0).sqrt()))
}

pub(crate) fn check_psd(eigenvalues: &[f64]) -> Result<()> {
    match eigenvalues.iter().copied().fold(f64::INFINITY, f64::min) {
        min if min < -tolerances::PSD_CLAMP => Err(Error::NotPsd {
            min_eigenvalue: min,
        }),
        _ => Ok(()),
    }
}

/// Kronecker product, `(a x b)[(i*p + k), (j*q + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.as_nalgebra().kronecker(b.as_nalgebra()))
}

/// `rho_AB = tr_C |psi><psi|`, i.e. `psi psi^dagger` for the 4 x n regrouped matrix.
pub fn partial_trace_last(state: &TripartitePureState) -> Result<DensityMatrix> {
    let norm = state.norm();
    if (norm - 1.0).abs() > tolerances::NORM {
        return Err(Error::NotNormalized { norm });
    }
    let psi = state.regrouped();
    Ok(DensityMatrix::from_trusted(&psi * &psi.adjoint()))
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => c64(0.0, -1.0),
        (1, 0) => c64(0.0, 1.0),
        _ => C64::ZERO,
    })
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `sigma_y (x) sigma_y` in the basis (00, 01, 10, 11).
pub fn spin_flip_operator() -> ComplexMatrix {
    kron(&pauli_y(), &pauli_y())
}
