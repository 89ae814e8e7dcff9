//! Dense complex matrices, validated density matrices and Hermitian spectral data.
//!
//! Everything here is immutable after construction. Storage is a column-major
//! [`nalgebra::DMatrix`]; indices are always `(row, col)`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigenvalues at or below this are treated as exactly zero downstream.
pub const EPS_ZERO: f64 = 1e-12;
/// Frobenius residual allowed when reconstructing from spectral data.
pub const TOL_RECON: f64 = 1e-10;
/// Allowed deviation of the eigenvector Gram matrix from the identity.
pub const TOL_ORTH: f64 = 1e-10;
/// Allowed deviation of a pure-state amplitude vector from unit norm.
pub const TOL_NORM: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

/// Acceptance thresholds for [`validate_density`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
        }
    }
}

/// A dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{})", self.nrows(), self.ncols())?;
        for i in 0..self.nrows() {
            write!(f, "\n  [")?;
            for j in 0..self.ncols() {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            write!(f, " ]")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, &mut f),
        }
    }

    /// Builds a matrix from rows, rejecting ragged input and non-finite entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    /// Real diagonal matrix.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let d = diag.len();
        Self::from_fn(d, d, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    /// The rank-one operator |v⟩⟨v|.
    pub fn outer(v: &[C64]) -> Self {
        let d = v.len();
        Self::from_fn(d, d, |i, j| v[i] * v[j].conj())
    }

    /// The matrix unit |n⟩⟨m| in dimension `dim`.
    pub fn unit(dim: usize, n: usize, m: usize) -> Self {
        Self::from_fn(dim, dim, |i, j| {
            if i == n && j == m {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_dmatrix(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Returns the dimension of a square matrix or `NotSquare`.
    pub fn square_dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.nrows())
        } else {
            Err(Error::NotSquare {
                rows: self.nrows(),
                cols: self.ncols(),
            })
        }
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            inner: &self.inner * s,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest |M_ij − conj(M_ji)| over all index pairs.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.nrows().min(self.ncols());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (M + M*)/2. Exact for matrices that are already Hermitian.
    pub fn hermitian_part(&self) -> Self {
        let n = self.nrows();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.inner[(i, i)].re, 0.0)
            } else {
                (self.inner[(i, j)] + self.inner[(j, i)].conj()) * 0.5
            }
        })
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows().min(self.ncols()))
            .map(|i| self.inner[(i, i)])
            .collect()
    }

    /// Keeps the diagonal, zeroes everything else.
    pub fn diagonal_part(&self) -> Self {
        Self::from_diagonal(&self.diagonal())
    }

    /// Largest modulus of an off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                if i != j {
                    worst = worst.max(self.inner[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        self.inner.column(j).iter().copied().collect()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let x = DVector::from_column_slice(v);
        (&self.inner * x).iter().copied().collect()
    }

    /// A K* for this K and the given A.
    pub fn sandwich(&self, a: &ComplexMatrix) -> ComplexMatrix {
        Self {
            inner: &self.inner * &a.inner * self.inner.adjoint(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

/// Kronecker product A ⊗ B.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        inner: a.inner.kronecker(&b.inner),
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector for `eigenvalues[j]`.
    vectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// Spectral data of `value`·I in the computational basis.
    pub fn scalar(dim: usize, value: f64) -> Self {
        Self {
            eigenvalues: vec![value; dim],
            vectors: ComplexMatrix::identity(dim),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn eigenvector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues strictly above `eps`.
    pub fn rank(&self, eps: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > eps).count()
    }

    /// Σ_j g(λ_j) |φ_j⟩⟨φ_j|.
    pub fn map_eigenvalues(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let v = self.vectors.as_dmatrix();
        let diag = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(g(self.eigenvalues[i]), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        ComplexMatrix::from_dmatrix(v * diag * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|l| l)
    }

    /// ‖Σ λ_j|φ_j⟩⟨φ_j| − M‖_F.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        (&self.reconstruct() - m).frobenius_norm()
    }

    /// Largest entry of |V*V − I|.
    pub fn orthonormality_error(&self) -> f64 {
        let v = self.vectors.as_dmatrix();
        let gram = v.adjoint() * v;
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    fn from_parts(mut pairs: Vec<(f64, Vec<C64>)>) -> Self {
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let d = pairs.len();
        let vectors = ComplexMatrix::from_fn(d, d, |i, j| pairs[j].1[i]);
        Self {
            eigenvalues: pairs.into_iter().map(|(l, _)| l).collect(),
            vectors,
        }
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Only the Hermitian part of `m` is used; callers validate hermiticity.
pub fn spectral_decompose(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let d = m.square_dim()?;
    if d == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let h = m.hermitian_part();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.inner, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::ConvergenceFailure)?;
    let pairs = (0..d)
        .map(|j| {
            let vec = eig.eigenvectors.column(j).iter().copied().collect();
            (eig.eigenvalues[j], vec)
        })
        .collect();
    Ok(SpectralDecomposition::from_parts(pairs))
}

/// Trace norm Tr√(M*M): sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    m.square_dim()?;
    if m.hermitian_deviation() == 0.0 {
        let spec = spectral_decompose(m)?;
        return Ok(spec.eigenvalues.iter().map(|l| l.abs()).sum());
    }
    let svd = m.inner.clone().svd(false, false);
    Ok(svd.singular_values.iter().sum())
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
///
/// The spectral decomposition is computed once during validation and cached.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectrum: SpectralDecomposition,
}

/// Checks the three state invariants and returns a [`DensityMatrix`].
///
/// Small violations within tolerance are repaired: eigenvalues are clipped to
/// [0, 1] and renormalized. The matrix is rebuilt from the repaired spectrum
/// only when the repair moved an eigenvalue by more than 1e-14.
pub fn validate_density(m: &ComplexMatrix, tol: Tolerances) -> Result<DensityMatrix> {
    m.square_dim()?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol.herm {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > tol.trace {
        return Err(Error::TraceNotOne { trace });
    }
    let h = m.hermitian_part();
    let spectrum = spectral_decompose(&h)?;
    let min_eigenvalue = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -tol.psd {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(DensityMatrix::repaired(h, spectrum))
}

impl DensityMatrix {
    /// Validates with default tolerances.
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        validate_density(m, Tolerances::default())
    }

    fn repaired(matrix: ComplexMatrix, spectrum: SpectralDecomposition) -> Self {
        let clipped: Vec<f64> = spectrum.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0)).collect();
        let total: f64 = clipped.iter().sum();
        let fixed: Vec<f64> = clipped.iter().map(|l| l / total).collect();
        let moved = fixed
            .iter()
            .zip(&spectrum.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let spectrum = SpectralDecomposition {
            eigenvalues: fixed,
            vectors: spectrum.vectors,
        };
        let matrix = if moved > 1e-14 {
            spectrum.reconstruct().hermitian_part()
        } else {
            matrix
        };
        Self { matrix, spectrum }
    }

    /// Builds a state from an unnormalized positive semidefinite matrix, e.g. K ρ K*.
    ///
    /// The PSD check is relative to the trace, so tiny outcome probabilities
    /// do not amplify rounding noise into a rejection.
    pub fn from_unnormalized(m: &ComplexMatrix, tol: Tolerances) -> Result<Self> {
        m.square_dim()?;
        let trace = m.trace().re;
        if !(trace > 0.0) {
            return Err(Error::TraceNotOne { trace });
        }
        let h = m.hermitian_part().scale_real(1.0 / trace);
        let deviation = m.hermitian_deviation() / trace;
        if deviation > tol.herm {
            return Err(Error::NotHermitian { deviation });
        }
        let spectrum = spectral_decompose(&h)?;
        let min_eigenvalue = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self::repaired(h, spectrum))
    }

    /// Diagonal (incoherent) state with the given probabilities.
    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let tol = Tolerances::default();
        if probs.is_empty() {
            return Err(Error::InvalidRank { rank: 0, dim: 0 });
        }
        if let Some(&p) = probs.iter().find(|p| !p.is_finite()) {
            return Err(Error::NotPositive { min_eigenvalue: p });
        }
        let min = probs.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne { trace: total });
        }
        let d = probs.len();
        let cleaned: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
        let pairs = cleaned
            .iter()
            .enumerate()
            .map(|(n, &p)| {
                let mut e = vec![C64::new(0.0, 0.0); d];
                e[n] = C64::new(1.0, 0.0);
                (p, e)
            })
            .collect();
        Ok(Self {
            matrix: ComplexMatrix::from_real_diagonal(&cleaned),
            spectrum: SpectralDecomposition::from_parts(pairs),
        })
    }

    /// I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0 / dim as f64; dim]).expect("uniform distribution is a state")
    }

    /// |n⟩⟨n|.
    pub fn basis_state(dim: usize, n: usize) -> Self {
        let mut p = vec![0.0; dim];
        p[n] = 1.0;
        Self::from_diagonal(&p).expect("basis projector is a state")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// Eigenvalues λ_j, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    /// Diagonal entries χ_j = ⟨j|ρ|j⟩ in the computational basis.
    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn rank(&self) -> usize {
        self.spectrum.rank(EPS_ZERO)
    }
}

/// A unit vector |ψ⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(v: Vec<C64>) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |ψ⟩⟨ψ| as a validated state.
    pub fn as_density(&self) -> DensityMatrix {
        DensityMatrix::new(&ComplexMatrix::outer(&self.amplitudes))
            .expect("outer product of a unit vector is a state")
    }
}
