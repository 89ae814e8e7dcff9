//! Dephasing and the f-coherence measures.
//!
//! With λ_j the eigenvalues of ρ and χ_j = ⟨j|ρ|j⟩ its diagonal in the fixed
//! computational basis:
//!
//! ```text
//! C_f(ρ) = Σ_j λ_j f(1/(dλ_j)) − Σ_j χ_j f(1/(dχ_j))   (reference I/d)
//! Ĉ_f(ρ) = Σ_j λ_j f(1/λ_j)    − Σ_j χ_j f(1/χ_j)      (reference I)
//! ```
//!
//! Both equal S̃_f(Δρ) − S̃_f(ρ); [`coherence_definitional`] computes that
//! difference through the general divergence so the two routes can be
//! compared.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::divergence::{f_entropy, f_entropy_hat, perspective_sum};
use crate::error::{Error, Result};
use crate::generator::GeneratorFunction;
use crate::matrix::{trace_norm, DensityMatrix, PureState, C64, EPS_ZERO};

/// Which reference operator the entropy uses: I/d (plain) or I (hat).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Hat,
}

impl Variant {
    pub const BOTH: [Variant; 2] = [Variant::Plain, Variant::Hat];

    /// The scale c in Σ p f(c/p): 1/d for plain, 1 for hat.
    fn scale(self, d: usize) -> f64 {
        match self {
            Variant::Plain => 1.0 / d as f64,
            Variant::Hat => 1.0,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Plain => "plain",
            Variant::Hat => "hat",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(Variant::Plain),
            "hat" => Ok(Variant::Hat),
            other => Err(format!("unknown variant `{other}` (expected plain or hat)")),
        }
    }
}

/// A coherence value with the spectral data it was computed from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherenceResult {
    pub value: f64,
    pub f_name: String,
    pub variant: Variant,
    pub eigenvalues: Vec<f64>,
    pub diagonal: Vec<f64>,
}

/// Δ(ρ) = Σ_j ⟨j|ρ|j⟩ |j⟩⟨j|.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_diagonal(&rho.diagonal()).expect("diagonal of a state is a distribution")
}

/// C̃_f(ρ) from the eigenvalue/diagonal closed form.
pub fn coherence(rho: &DensityMatrix, f: &GeneratorFunction, variant: Variant) -> Result<CoherenceResult> {
    let c = variant.scale(rho.dim());
    let eigenvalues = rho.eigenvalues().to_vec();
    let diagonal = rho.diagonal();
    let value = perspective_sum(&eigenvalues, c, f, "coherence (eigenvalues)")?
        - perspective_sum(&diagonal, c, f, "coherence (diagonal)")?;
    Ok(CoherenceResult {
        value,
        f_name: f.name(),
        variant,
        eigenvalues,
        diagonal,
    })
}

/// C_f(ρ) = S_f(Δρ) − S_f(ρ).
pub fn coherence_f(rho: &DensityMatrix, f: &GeneratorFunction) -> Result<CoherenceResult> {
    coherence(rho, f, Variant::Plain)
}

/// Ĉ_f(ρ) = Ŝ_f(Δρ) − Ŝ_f(ρ).
pub fn coherence_f_hat(rho: &DensityMatrix, f: &GeneratorFunction) -> Result<CoherenceResult> {
    coherence(rho, f, Variant::Hat)
}

/// S̃_f(Δρ) − S̃_f(ρ) through the general quasi-relative entropy.
pub fn coherence_definitional(rho: &DensityMatrix, f: &GeneratorFunction, variant: Variant) -> Result<f64> {
    let dephased = dephase(rho);
    match variant {
        Variant::Plain => Ok(f_entropy(&dephased, f)? - f_entropy(rho, f)?),
        Variant::Hat => Ok(f_entropy_hat(&dephased, f)? - f_entropy_hat(rho, f)?),
    }
}

/// The largest attainable value: f(1/d) for plain, −f(d) for hat.
pub fn max_coherence(f: &GeneratorFunction, d: usize, variant: Variant) -> f64 {
    match variant {
        Variant::Plain => f.eval(1.0 / d as f64),
        Variant::Hat => -f.eval(d as f64),
    }
}

fn shannon(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > EPS_ZERO)
        .map(|&x| -x * x.ln())
        .sum()
}

/// S(Δρ) − S(ρ) from Shannon entropies of the diagonal and the spectrum.
pub fn relative_entropy_coherence(rho: &DensityMatrix) -> f64 {
    shannon(&rho.diagonal()) - shannon(rho.eigenvalues())
}

/// C_α and Ĉ_α for the power family f(x) = (1 − x^{1−α})/(1 − α).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerCoherence {
    pub plain: f64,
    pub hat: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) || alpha == 1.0 {
        return Err(Error::ParamOutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 2) without {1}",
        });
    }
    Ok(())
}

/// Both power coherences through the generic closed forms.
pub fn power_coherence(rho: &DensityMatrix, alpha: f64) -> Result<PowerCoherence> {
    check_alpha(alpha)?;
    let f = GeneratorFunction::tsallis(alpha)?;
    Ok(PowerCoherence {
        plain: coherence_f(rho, &f)?.value,
        hat: coherence_f_hat(rho, &f)?.value,
    })
}

/// d^{α−1}/(1−α) [Σ χ_j^α − Σ λ_j^α] and its hat counterpart without the d factor.
pub fn power_coherence_closed_form(rho: &DensityMatrix, alpha: f64) -> Result<PowerCoherence> {
    check_alpha(alpha)?;
    let pow_sum = |v: &[f64]| v.iter().map(|&x| x.max(0.0).powf(alpha)).sum::<f64>();
    let hat = (pow_sum(&rho.diagonal()) - pow_sum(rho.eigenvalues())) / (1.0 - alpha);
    let d = rho.dim() as f64;
    Ok(PowerCoherence {
        plain: d.powf(alpha - 1.0) * hat,
        hat,
    })
}

/// True iff every off-diagonal |ρ_nm| ≤ tol.
pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    rho.matrix().max_off_diagonal() <= tol
}

/// ‖ρ − Δ(ρ)‖₁.
pub fn dephasing_distance(rho: &DensityMatrix) -> f64 {
    let diff = rho.matrix() - dephase(rho).matrix();
    trace_norm(&diff).expect("square matrix")
}

/// (1/√d) Σ_j |j⟩.
pub fn max_coherent_state(d: usize) -> PureState {
    let a = 1.0 / (d as f64).sqrt();
    PureState::normalized(vec![C64::new(a, 0.0); d]).expect("uniform vector is nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::builtin_catalog;
    use crate::matrix::ComplexMatrix;
    use crate::random::{random_density, random_pure};

    fn plus() -> DensityMatrix {
        max_coherent_state(2).as_density()
    }

    /// Pure state with diagonal (0.75, 0.25).
    fn skewed_pure() -> DensityMatrix {
        PureState::new(vec![C64::new(0.75f64.sqrt(), 0.0), C64::new(0.25f64.sqrt(), 0.0)])
            .unwrap()
            .as_density()
    }

    fn binary_entropy(p: f64) -> f64 {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }

    #[test]
    fn dephase_examples() {
        let d = dephase(&plus());
        assert!(d.diagonal().iter().all(|&x| (x - 0.5).abs() < 1e-15));
        assert_eq!(d.matrix().max_off_diagonal(), 0.0);
        assert!(is_incoherent(&d, 0.0));
        let diag = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(dephase(&diag), diag);
        let rho = random_density(3, 3, 4).unwrap();
        assert_eq!(dephase(&dephase(&rho)), dephase(&rho));
    }

    #[test]
    fn incoherent_states_have_zero_coherence() {
        let diag = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        for f in builtin_catalog() {
            for v in Variant::BOTH {
                assert!(coherence(&diag, &f, v).unwrap().value.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn maximally_coherent_attains_maximum() {
        for d in 2..=5 {
            let psi = max_coherent_state(d).as_density();
            let diff = dephase(&psi).matrix() - DensityMatrix::maximally_mixed(d).matrix();
            assert!(diff.max_abs() < 1e-15);
            for f in builtin_catalog() {
                for v in Variant::BOTH {
                    let c = coherence(&psi, &f, v).unwrap().value;
                    assert!((c - max_coherence(&f, d, v)).abs() < 1e-10, "{f} {v} d={d}");
                }
            }
        }
        let s = max_coherent_state(2);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.amplitudes().iter().all(|z| (z.re - a).abs() < 1e-16 && z.im == 0.0));
    }

    #[test]
    fn skewed_pure_state_neg_log() {
        let rho = skewed_pure();
        let h = binary_entropy(0.75);
        assert!((h - 0.5623).abs() < 1e-4);
        let f = GeneratorFunction::neg_log();
        assert!((coherence_f(&rho, &f).unwrap().value - h).abs() < 1e-12);
        assert!((coherence_f_hat(&rho, &f).unwrap().value - h).abs() < 1e-12);
        assert!((relative_entropy_coherence(&rho) - h).abs() < 1e-12);
    }

    #[test]
    fn neg_log_hat_matches_relative_entropy_coherence() {
        let f = GeneratorFunction::neg_log();
        for seed in 0..20 {
            let rho = random_density(4, 1 + seed as usize % 4, seed).unwrap();
            let a = coherence_f_hat(&rho, &f).unwrap().value;
            assert!((a - relative_entropy_coherence(&rho)).abs() < 1e-10);
            let dephased = dephase(&rho);
            if dephased.rank() == 4 {
                let s = crate::divergence::quasi_relative_entropy(&rho, &dephased, &f)
                    .unwrap()
                    .to_f64();
                assert!((a - s).abs() < 1e-8);
            }
        }
        assert!((relative_entropy_coherence(&plus()) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_definition() {
        for seed in 0..20 {
            let rho = random_density(3, 1 + seed as usize % 3, 100 + seed).unwrap();
            for f in builtin_catalog() {
                for v in Variant::BOTH {
                    let a = coherence(&rho, &f, v).unwrap().value;
                    let b = coherence_definitional(&rho, &f, v).unwrap();
                    assert!((a - b).abs() < 1e-10, "{f} {v}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn power_coherence_examples() {
        let diag = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
        let pc = power_coherence(&diag, 0.5).unwrap();
        assert!(pc.plain.abs() < 1e-15 && pc.hat.abs() < 1e-15);

        let pc = power_coherence(&plus(), 0.5).unwrap();
        let expected_hat = 2.0 * (2f64.sqrt() - 1.0);
        assert!((pc.hat - expected_hat).abs() < 1e-12);
        assert!((pc.plain - expected_hat / 2f64.sqrt()).abs() < 1e-12);
        let cf = power_coherence_closed_form(&plus(), 0.5).unwrap();
        assert!((cf.hat - expected_hat).abs() < 1e-12);

        assert!(matches!(power_coherence(&plus(), 1.0), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(power_coherence(&plus(), 2.0), Err(Error::ParamOutOfRange { .. })));
    }

    #[test]
    fn power_identity_on_random_states() {
        for seed in 0..50 {
            let d = 2 + seed as usize % 3;
            let rho = random_density(d, d, seed).unwrap();
            for alpha in [0.3, 0.5, 1.5] {
                let pc = power_coherence(&rho, alpha).unwrap();
                let scale = (d as f64).powf(alpha - 1.0);
                assert!((pc.plain - scale * pc.hat).abs() <= 1e-9 * pc.plain.abs().max(1e-300));
                let cf = power_coherence_closed_form(&rho, alpha).unwrap();
                assert!((pc.hat - cf.hat).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn incoherence_predicate() {
        let diag = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!(is_incoherent(&diag, 1e-10));
        assert!(!is_incoherent(&plus(), 1e-10));
        let tiny = ComplexMatrix::from_rows(&[
            vec![C64::new(0.5, 0.0), C64::new(1e-14, 0.0)],
            vec![C64::new(1e-14, 0.0), C64::new(0.5, 0.0)],
        ])
        .unwrap();
        assert!(is_incoherent(&DensityMatrix::new(&tiny).unwrap(), 1e-10));
    }

    #[test]
    fn dephasing_distance_examples() {
        let diag = DensityMatrix::from_diagonal(&[0.2, 0.8]).unwrap();
        assert_eq!(dephasing_distance(&diag), 0.0);
        assert!((dephasing_distance(&plus()) - 1.0).abs() < 1e-14);
        for seed in 0..10 {
            let rho = random_density(3, 2, seed).unwrap();
            assert_eq!(dephasing_distance(&rho) > 0.0, !is_incoherent(&rho, 0.0));
        }
    }

    #[test]
    fn pure_state_coherence_is_dephased_entropy() {
        for seed in 0..10 {
            let psi = random_pure(4, seed).as_density();
            for f in builtin_catalog() {
                let c = coherence_f(&psi, &f).unwrap().value;
                let s = f_entropy(&dephase(&psi), &f).unwrap();
                assert!((c - s).abs() < 1e-10);
                let c = coherence_f_hat(&psi, &f).unwrap().value;
                let s = f_entropy_hat(&dephase(&psi), &f).unwrap();
                assert!((c - s).abs() < 1e-10);
            }
        }
    }
}
