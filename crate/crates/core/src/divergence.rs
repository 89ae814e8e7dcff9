//! Quasi-relative entropy S_f(A‖B) and the two f-entropies built from it.
//!
//! The production path uses the spectral formula
//!
//! ```text
//! S_f(A‖B) = Σ_{j,k} λ_j f(μ_k/λ_j) |⟨ψ_k|φ_j⟩|²
//! ```
//!
//! with (λ_j, φ_j) and (μ_k, ψ_k) the spectral data of A and B. An
//! independent oracle builds the superoperator L_B R_A^{-1} explicitly.

use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::generator::GeneratorFunction;
use crate::matrix::{DensityMatrix, SpectralDecomposition, C64, EPS_ZERO};

/// Eigenvalues closer than this are merged into one eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// A support mismatch only produces +∞ when the overlap exceeds this.
pub const SUPPORT_OVERLAP: f64 = 1e-12;

/// A real number or +∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Self::Finite(v) => Some(v),
            Self::PosInf => None,
        }
    }

    /// `f64::INFINITY` for the infinite case.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Multiplication by c > 0.
    pub fn scale(&self, c: f64) -> Self {
        match *self {
            Self::Finite(v) => Self::Finite(c * v),
            Self::PosInf => Self::PosInf,
        }
    }
}

impl Add for ExtendedReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a + b),
            _ => Self::PosInf,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::PosInf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::PosInf => s.serialize_str("inf"),
        }
    }
}

/// An eigenspace: averaged eigenvalue and member indices.
struct Eigenspace {
    value: f64,
    members: Vec<usize>,
}

/// Groups descending eigenvalues into eigenspaces; everything at or below
/// `EPS_ZERO` collapses into a single zero eigenspace.
fn eigenspaces(eigenvalues: &[f64]) -> Vec<Eigenspace> {
    let mut groups: Vec<Eigenspace> = Vec::new();
    let mut anchor = f64::NAN;
    for (j, &l) in eigenvalues.iter().enumerate() {
        let l = if l <= EPS_ZERO { 0.0 } else { l };
        match groups.last_mut() {
            Some(g) if (l == 0.0 && g.value == 0.0) || (anchor - l).abs() <= DEGENERACY_TOL => {
                g.members.push(j);
            }
            _ => {
                anchor = l;
                groups.push(Eigenspace {
                    value: l,
                    members: vec![j],
                });
            }
        }
    }
    for g in &mut groups {
        if g.value != 0.0 {
            g.value = g.members.iter().map(|&j| eigenvalues[j]).sum::<f64>() / g.members.len() as f64;
        }
    }
    groups
}

/// S_f(A‖B) from spectral data of two positive operators of equal dimension.
pub fn quasi_relative_entropy_spectral(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    f: &GeneratorFunction,
) -> Result<ExtendedReal> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    // overlaps[(k, j)] = ⟨ψ_k|φ_j⟩
    let overlaps = &b.vectors().adjoint() * a.vectors();
    let groups_a = eigenspaces(a.eigenvalues());
    let groups_b = eigenspaces(b.eigenvalues());

    let mut total = 0.0;
    for ga in &groups_a {
        for gb in &groups_b {
            let w: f64 = ga
                .members
                .iter()
                .flat_map(|&j| gb.members.iter().map(move |&k| (k, j)))
                .map(|(k, j)| overlaps[(k, j)].norm_sqr())
                .sum();
            let (lambda, mu) = (ga.value, gb.value);
            let term = match (lambda > 0.0, mu > 0.0) {
                (true, true) => ExtendedReal::Finite(lambda * f.eval(mu / lambda) * w),
                (true, false) => f.limit_at_zero().scale(lambda * w),
                (false, true) => f.limit_at_inf_weighted(mu).scale(w),
                (false, false) => ExtendedReal::Finite(0.0),
            };
            match term {
                ExtendedReal::Finite(v) => total += v,
                ExtendedReal::PosInf if w > SUPPORT_OVERLAP => return Ok(ExtendedReal::PosInf),
                ExtendedReal::PosInf => {}
            }
        }
    }
    Ok(ExtendedReal::Finite(total))
}

/// S_f(A‖B) for two states.
pub fn quasi_relative_entropy(
    a: &DensityMatrix,
    b: &DensityMatrix,
    f: &GeneratorFunction,
) -> Result<ExtendedReal> {
    quasi_relative_entropy_spectral(a.spectrum(), b.spectrum(), f)
}

/// Brute-force S_f(A‖B) = Tr(f(L_B R_A^{-1}) A), intended for d ≤ 6.
///
/// In the row-major vectorization vec(X)_{(i,j)} = X_ij the superoperator
/// X ↦ B X A^{-1} is the d²×d² matrix B ⊗ (A^{-1})^T, which is Hermitian and
/// positive. f is applied through its eigendecomposition and the trace is
/// ⟨vec(I), f(M) vec(A)⟩.
pub fn oracle_quasi_relative_entropy(
    a: &DensityMatrix,
    b: &DensityMatrix,
    f: &GeneratorFunction,
) -> Result<ExtendedReal> {
    let d = a.dim();
    if b.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: b.dim(),
        });
    }
    for state in [a, b] {
        let min = state.eigenvalues().last().copied().unwrap_or(0.0);
        if min <= EPS_ZERO {
            return Err(Error::SingularState { min_eigenvalue: min });
        }
    }
    let a_inv = a
        .matrix()
        .as_dmatrix()
        .clone()
        .try_inverse()
        .ok_or(Error::SingularState { min_eigenvalue: 0.0 })?;
    let a_inv_t = a_inv.transpose();
    let bm = b.matrix().as_dmatrix();
    let m = bm.kronecker(&a_inv_t);
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or(Error::ConvergenceFailure)?;
    let n = d * d;
    let fvals: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&x| C64::new(f.eval(x), 0.0))
        .collect();
    let v = &eig.eigenvectors;
    let f_m = v * nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(fvals)) * v.adjoint();
    let am = a.matrix().as_dmatrix();
    let mut total = C64::new(0.0, 0.0);
    for i in 0..d {
        let row = i * d + i;
        for col in 0..n {
            total += f_m[(row, col)] * am[(col / d, col % d)];
        }
    }
    Ok(ExtendedReal::Finite(total.re))
}

/// Σ_j p_j f(c/p_j), with p_j ≤ `EPS_ZERO` contributing lim_{x→0⁺} x f(c/x).
///
/// This is the eigenvalue form shared by the entropies and coherences; an
/// infinite limit is reported as `UnsupportedLimit`.
pub fn perspective_sum(probs: &[f64], c: f64, f: &GeneratorFunction, context: &'static str) -> Result<f64> {
    let mut total = 0.0;
    for &p in probs {
        if p > EPS_ZERO {
            total += p * f.eval(c / p);
        } else {
            match f.limit_at_inf_weighted(c) {
                ExtendedReal::Finite(v) => total += v,
                ExtendedReal::PosInf => {
                    return Err(Error::UnsupportedLimit {
                        generator: f.name(),
                        context,
                    })
                }
            }
        }
    }
    Ok(total)
}

fn finite_or_unsupported(v: ExtendedReal, f: &GeneratorFunction, context: &'static str) -> Result<f64> {
    v.finite().ok_or_else(|| Error::UnsupportedLimit {
        generator: f.name(),
        context,
    })
}

/// S_f(ρ) = f(1/d) − S_f(ρ‖I/d).
pub fn f_entropy(rho: &DensityMatrix, f: &GeneratorFunction) -> Result<f64> {
    let d = rho.dim();
    let reference = SpectralDecomposition::scalar(d, 1.0 / d as f64);
    let div = quasi_relative_entropy_spectral(rho.spectrum(), &reference, f)?;
    Ok(f.eval(1.0 / d as f64) - finite_or_unsupported(div, f, "f-entropy of a rank-deficient state")?)
}

/// Ŝ_f(ρ) = −S_f(ρ‖I).
pub fn f_entropy_hat(rho: &DensityMatrix, f: &GeneratorFunction) -> Result<f64> {
    let reference = SpectralDecomposition::scalar(rho.dim(), 1.0);
    let div = quasi_relative_entropy_spectral(rho.spectrum(), &reference, f)?;
    Ok(-finite_or_unsupported(div, f, "f-entropy of a rank-deficient state")?)
}

/// S_f(ρ) through the eigenvalue form f(1/d) − Σ_j λ_j f(1/(dλ_j)).
pub fn f_entropy_eigen(rho: &DensityMatrix, f: &GeneratorFunction) -> Result<f64> {
    let d = rho.dim() as f64;
    Ok(f.eval(1.0 / d) - perspective_sum(rho.eigenvalues(), 1.0 / d, f, "f-entropy")?)
}

/// Ŝ_f(ρ) through the eigenvalue form −Σ_j λ_j f(1/λ_j).
pub fn f_entropy_hat_eigen(rho: &DensityMatrix, f: &GeneratorFunction) -> Result<f64> {
    Ok(-perspective_sum(rho.eigenvalues(), 1.0, f, "f-entropy")?)
}
