//! Kraus channels, the GIO/SIO classes, selective measurements and Petz recovery.

use std::ops::Deref;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{spectral_decompose, tensor, trace_norm, ComplexMatrix, DensityMatrix, Tolerances, C64, EPS_ZERO};
use crate::random::{random_unit_vector, rng_from_seed};

/// Tolerance on ‖Σ K*K − I‖_F for a channel.
pub const TOL_COMPLETENESS: f64 = 1e-10;
/// Off-diagonal magnitude allowed in a GIO Kraus operator.
pub const TOL_DIAGONAL: f64 = 1e-12;

/// A completely positive map Σ K ω K*, not necessarily trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausMap {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidConfig("a Kraus map needs at least one operator".into()))?;
        let dim = first.square_dim()?;
        for k in &ops {
            let d = k.square_dim()?;
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
        }
        Ok(Self { dim, ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = m.square_dim()?;
        if d != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: d });
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.ops {
            out = &out + &k.sandwich(m);
        }
        Ok(out)
    }

    /// The adjoint map ω ↦ Σ K* ω K.
    pub fn dual(&self) -> KrausMap {
        KrausMap {
            dim: self.dim,
            ops: self.ops.iter().map(ComplexMatrix::adjoint).collect(),
        }
    }

    /// ‖Σ K*K − I‖_F.
    pub fn completeness_deviation(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.ops {
            acc = &acc + &(&k.adjoint() * k);
        }
        (&acc - &ComplexMatrix::identity(self.dim)).frobenius_norm()
    }

    /// ‖Σ KK* − I‖_F.
    pub fn unitality_deviation(&self) -> f64 {
        self.dual().completeness_deviation()
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.completeness_deviation() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_deviation() <= tol
    }
}

/// A trace-preserving Kraus map.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    map: KrausMap,
    label: Option<String>,
}

/// One branch of a selective measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub probability: f64,
    pub post_state: Option<DensityMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>, label: Option<String>) -> Result<Self> {
        Self::from_map(KrausMap::new(ops)?, label)
    }

    pub fn from_map(map: KrausMap, label: Option<String>) -> Result<Self> {
        let deviation = map.completeness_deviation();
        if deviation > TOL_COMPLETENESS {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { map, label })
    }

    pub fn identity(d: usize) -> Self {
        Self::unitary(ComplexMatrix::identity(d), Some(format!("identity:{d}"))).expect("identity is unitary")
    }

    pub fn unitary(u: ComplexMatrix, label: Option<String>) -> Result<Self> {
        Self::new(vec![u], label)
    }

    pub fn dim(&self) -> usize {
        self.map.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.map.ops
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn map(&self) -> &KrausMap {
        &self.map
    }

    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.map.apply_matrix(m)
    }

    /// Σ K ρ K*, revalidated as a state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(&self.apply_matrix(rho.matrix())?)
    }

    /// The adjoint map. It is trace preserving only when the channel is unital.
    pub fn dual(&self) -> KrausMap {
        self.map.dual()
    }

    /// The dual as a channel; requires unitality.
    pub fn dual_channel(&self) -> Result<KrausChannel> {
        let deviation = self.map.unitality_deviation();
        if deviation > TOL_COMPLETENESS {
            return Err(Error::NotUnital { deviation });
        }
        Ok(KrausChannel {
            map: self.map.dual(),
            label: self.label.as_ref().map(|l| format!("dual({l})")),
        })
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.map.is_unital(tol)
    }

    /// p_n = Tr K_n ρ K_n* and ρ_n = K_n ρ K_n*/p_n. Outcomes with p_n ≤ EPS_ZERO carry no state.
    pub fn selective_outcomes(&self, rho: &DensityMatrix) -> Result<Vec<MeasurementOutcome>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        let tol = Tolerances::default();
        self.kraus_ops()
            .iter()
            .enumerate()
            .map(|(index, k)| {
                let branch = k.sandwich(rho.matrix());
                let probability = branch.trace().re.max(0.0);
                let post_state = if probability > EPS_ZERO {
                    Some(DensityMatrix::from_unnormalized(&branch, tol)?)
                } else {
                    None
                };
                Ok(MeasurementOutcome { index, probability, post_state })
            })
            .collect()
    }
}

/// A channel with diagonal Kraus operators K_j = Σ_n k_jn |n⟩⟨n|.
#[derive(Clone, Debug, PartialEq)]
pub struct GioChannel {
    channel: KrausChannel,
    coefficients: Vec<Vec<C64>>,
}

impl GioChannel {
    /// Builds K_j = diag(table[j]).
    pub fn from_coefficients(table: Vec<Vec<C64>>, label: Option<String>) -> Result<Self> {
        let d = table
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidConfig("a GIO needs at least one Kraus operator".into()))?;
        if let Some(row) = table.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: row.len() });
        }
        let ops = table.iter().map(|row| ComplexMatrix::from_diagonal(row)).collect();
        Ok(Self {
            channel: KrausChannel::new(ops, label)?,
            coefficients: table,
        })
    }

    /// Reads the coefficient table off a channel whose Kraus operators are diagonal within `tol`.
    pub fn try_from_channel(channel: KrausChannel, tol: f64) -> Result<Self> {
        for (j, k) in channel.kraus_ops().iter().enumerate() {
            let off = k.max_off_diagonal();
            if off > tol {
                return Err(Error::NotGio(format!(
                    "Kraus operator {j} has off-diagonal magnitude {off:e}"
                )));
            }
        }
        let coefficients = channel.kraus_ops().iter().map(ComplexMatrix::diagonal).collect();
        Ok(Self { channel, coefficients })
    }

    /// The full dephasing channel {|n⟩⟨n|}.
    pub fn dephasing(d: usize) -> Self {
        let table = (0..d)
            .map(|j| (0..d).map(|n| C64::new(if j == n { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        Self::from_coefficients(table, Some(format!("dephase:{d}"))).expect("projectors are complete")
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn into_channel(self) -> KrausChannel {
        self.channel
    }

    /// k[j][n].
    pub fn coefficients(&self) -> &[Vec<C64>] {
        &self.coefficients
    }

    /// Σ_j conj(k_jn) k_jm.
    pub fn overlap(&self, n: usize, m: usize) -> C64 {
        self.coefficients.iter().map(|row| row[n].conj() * row[m]).sum()
    }
}

impl Deref for GioChannel {
    type Target = KrausChannel;
    fn deref(&self) -> &KrausChannel {
        &self.channel
    }
}

/// Every Kraus operator diagonal within `tol` and every basis state fixed within `tol` in trace norm.
pub fn is_gio(ch: &KrausChannel, tol: f64) -> bool {
    if ch.kraus_ops().iter().any(|k| k.max_off_diagonal() > tol) {
        return false;
    }
    let d = ch.dim();
    (0..d).all(|n| {
        let delta = ComplexMatrix::unit(d, n, n);
        match ch.apply_matrix(&delta) {
            Ok(out) => trace_norm(&(&out - &delta)).map(|x| x <= tol).unwrap_or(false),
            Err(_) => false,
        }
    })
}

/// K Δ(E_nm) K* = Δ(K E_nm K*) for every Kraus operator and matrix unit E_nm.
///
/// K E_nm K* = |k_n⟩⟨k_m| with k_n the n-th column of K, so both sides are
/// read off the columns without forming the products.
pub fn is_sio(ch: &KrausChannel, tol: f64) -> bool {
    let d = ch.dim();
    ch.kraus_ops().iter().all(|k| {
        let cols: Vec<Vec<C64>> = (0..d).map(|n| k.column(n)).collect();
        (0..d).all(|n| {
            (0..d).all(|m| {
                if n == m {
                    // |k_n⟩⟨k_n| must equal its own diagonal.
                    (0..d).all(|i| (0..d).all(|l| i == l || (cols[n][i] * cols[n][l].conj()).norm() <= tol))
                } else {
                    // Left side vanishes; the diagonal of |k_n⟩⟨k_m| must too.
                    (0..d).all(|i| (cols[n][i] * cols[m][i].conj()).norm() <= tol)
                }
            })
        })
    })
}

pub fn random_gio_with<R: Rng + ?Sized>(rng: &mut R, d: usize, num_kraus: usize) -> Result<GioChannel> {
    if num_kraus == 0 {
        return Err(Error::InvalidConfig("num_kraus must be at least 1".into()));
    }
    let columns: Vec<Vec<C64>> = (0..d).map(|_| random_unit_vector(rng, num_kraus)).collect();
    let table = (0..num_kraus)
        .map(|j| (0..d).map(|n| columns[n][j]).collect())
        .collect();
    GioChannel::from_coefficients(table, Some(format!("random-gio:{d}:{num_kraus}")))
}

/// For each n, (k_1n, …, k_mn) is a Haar-random unit vector in ℂ^m.
pub fn random_gio(d: usize, num_kraus: usize, seed: u64) -> Result<GioChannel> {
    random_gio_with(&mut rng_from_seed(seed), d, num_kraus)
}

/// Kraus operators √α_j U_j with U_j = Σ_n e^{iφ_jn} |n⟩⟨n|.
pub fn diagonal_unitary_mixture(weights: &[f64], phases: &[Vec<f64>]) -> Result<GioChannel> {
    if weights.is_empty() {
        return Err(Error::BadWeights("no weights given".into()));
    }
    if weights.len() != phases.len() {
        return Err(Error::BadWeights(format!(
            "{} weights for {} unitaries",
            weights.len(),
            phases.len()
        )));
    }
    if let Some(w) = weights.iter().find(|&&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::BadWeights(format!("weight {w} is not positive")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TOL_COMPLETENESS {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    let table = weights
        .iter()
        .zip(phases)
        .map(|(&w, row)| row.iter().map(|&phi| C64::from_polar(w.sqrt(), phi)).collect())
        .collect();
    GioChannel::from_coefficients(table, Some("diagonal-unitary-mixture".into()))
}

fn check_extension_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidConfig(format!("extension dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// Kraus operators I ⊗ |i⟩⟨j|/√d on ℂ^d ⊗ ℂ^d: ρ ⊗ σ ↦ ρ ⊗ I/d.
pub fn depolarizing_extension(d: usize) -> Result<KrausChannel> {
    check_extension_dim(d)?;
    let id = ComplexMatrix::identity(d);
    let s = 1.0 / (d as f64).sqrt();
    let ops = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| tensor(&id, &ComplexMatrix::unit(d, i, j).scale_real(s)))
        .collect();
    KrausChannel::new(ops, Some(format!("depol-ext:{d}")))
}

/// Kraus operators I ⊗ |0⟩⟨j| on ℂ^d ⊗ ℂ^d: ρ ⊗ σ ↦ ρ ⊗ |0⟩⟨0|.
pub fn erasure_extension(d: usize) -> Result<KrausChannel> {
    check_extension_dim(d)?;
    let id = ComplexMatrix::identity(d);
    let ops = (0..d).map(|j| tensor(&id, &ComplexMatrix::unit(d, 0, j))).collect();
    KrausChannel::new(ops, Some(format!("erase-ext:{d}")))
}

/// ω ↦ σ^{1/2} Λ*(Λ(σ)^{-1/2} ω Λ(σ)^{-1/2}) σ^{1/2}.
#[derive(Clone, Debug)]
pub struct PetzRecovery {
    sigma_sqrt: ComplexMatrix,
    output_inv_sqrt: ComplexMatrix,
    dual: KrausMap,
}

fn positive_definite_power(m: &ComplexMatrix, exponent: f64) -> Result<ComplexMatrix> {
    let spec = spectral_decompose(m)?;
    let min = spec.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if min <= EPS_ZERO {
        return Err(Error::SingularState { min_eigenvalue: min });
    }
    Ok(spec.map_eigenvalues(|x| x.powf(exponent)))
}

/// The Petz recovery map of `ch` at a positive definite σ (σ need not have unit trace).
pub fn petz_recovery(ch: &KrausChannel, sigma: &ComplexMatrix) -> Result<PetzRecovery> {
    let d = sigma.square_dim()?;
    if d != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), found: d });
    }
    let deviation = sigma.hermitian_deviation();
    if deviation > Tolerances::default().herm {
        return Err(Error::NotHermitian { deviation });
    }
    let sigma_sqrt = positive_definite_power(sigma, 0.5)?;
    let output = ch.apply_matrix(sigma)?;
    let output_inv_sqrt = positive_definite_power(&output, -0.5)?;
    Ok(PetzRecovery {
        sigma_sqrt,
        output_inv_sqrt,
        dual: ch.dual(),
    })
}

impl PetzRecovery {
    pub fn apply_matrix(&self, omega: &ComplexMatrix) -> Result<ComplexMatrix> {
        let inner = self.output_inv_sqrt.sandwich(omega);
        Ok(self.sigma_sqrt.sandwich(&self.dual.apply_matrix(&inner)?))
    }
}

/// The (n, m) pair closest to breaking saturation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaturationWitness {
    pub n: usize,
    pub m: usize,
    /// |Σ_j conj(k_jn) k_jm|².
    pub value: f64,
    /// |ρ_nm|.
    pub coherence: f64,
    /// Least-squares α with k_jn ≈ α k_jm.
    pub ratio: (f64, f64),
    /// max_j |k_jn − α k_jm|.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaturationReport {
    pub saturates: bool,
    pub witness: Option<SaturationWitness>,
}

fn proportionality(ch: &GioChannel, n: usize, m: usize) -> (C64, f64) {
    let km: f64 = ch.coefficients().iter().map(|r| r[m].norm_sqr()).sum();
    let alpha = if km > 0.0 {
        ch.coefficients().iter().map(|r| r[n] * r[m].conj()).sum::<C64>() / km
    } else {
        C64::new(0.0, 0.0)
    };
    let residual = ch
        .coefficients()
        .iter()
        .map(|r| (r[n] - alpha * r[m]).norm())
        .fold(0.0, f64::max);
    (alpha, residual)
}

/// Saturation holds iff |Σ_j conj(k_jn) k_jm|² ≥ 1 − tol for every n < m with |ρ_nm| > tol.
pub fn gio_saturation_check(ch: &GioChannel, rho: &DensityMatrix, tol: f64) -> Result<SaturationReport> {
    let d = ch.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let mut worst: Option<SaturationWitness> = None;
    for n in 0..d {
        for m in n + 1..d {
            let coherence = rho.matrix()[(n, m)].norm();
            if coherence <= tol {
                continue;
            }
            let value = ch.overlap(n, m).norm_sqr();
            if worst.as_ref().is_none_or(|w| value < w.value) {
                let (alpha, residual) = proportionality(ch, n, m);
                worst = Some(SaturationWitness {
                    n,
                    m,
                    value,
                    coherence,
                    ratio: (alpha.re, alpha.im),
                    residual,
                });
            }
        }
    }
    Ok(SaturationReport {
        saturates: worst.as_ref().is_none_or(|w| w.value >= 1.0 - tol),
        witness: worst,
    })
}

/// ‖ρ − Λ*(Λ(ρ))‖₁ for a unital channel.
pub fn recovery_defect(ch: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let deviation = ch.map().unitality_deviation();
    if deviation > TOL_COMPLETENESS {
        return Err(Error::NotUnital { deviation });
    }
    let round_trip = ch.dual().apply_matrix(&ch.apply_matrix(rho.matrix())?)?;
    trace_norm(&(rho.matrix() - &round_trip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::{dephase, dephasing_distance, max_coherent_state};
    use crate::random::{random_density, random_density_with, random_incoherent, random_unitary};

    fn plus() -> DensityMatrix {
        max_coherent_state(2).as_density()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_rows(&[
            vec![C64::new(s, 0.0), C64::new(s, 0.0)],
            vec![C64::new(s, 0.0), C64::new(-s, 0.0)],
        ])
        .unwrap()
    }

    fn full_depolarizing(d: usize) -> KrausChannel {
        let s = 1.0 / (d as f64).sqrt();
        let ops = (0..d)
            .flat_map(|i| (0..d).map(move |j| ComplexMatrix::unit(d, i, j).scale_real(s)))
            .collect();
        KrausChannel::new(ops, None).unwrap()
    }

    fn split_projectors() -> GioChannel {
        GioChannel::dephasing(2)
    }

    #[test]
    fn completeness_is_enforced() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            KrausChannel::new(vec![half], None),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(matches!(
            KrausChannel::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)], None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let rho = random_density(3, 3, 1).unwrap();
        let id = KrausChannel::identity(3);
        assert!(close(id.apply(&rho).unwrap().matrix(), rho.matrix(), 1e-15));
        let deph = GioChannel::dephasing(3);
        assert!(close(deph.apply(&rho).unwrap().matrix(), dephase(&rho).matrix(), 1e-15));
        let out = full_depolarizing(3).apply(&rho).unwrap();
        assert!(close(out.matrix(), DensityMatrix::maximally_mixed(3).matrix(), 1e-14));
        assert!(matches!(id.apply(&plus()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dual_examples() {
        let id = KrausChannel::identity(2);
        assert_eq!(id.dual(), *id.map());
        let deph = GioChannel::dephasing(3);
        let rho = random_density(3, 3, 2).unwrap();
        let a = deph.dual().apply_matrix(rho.matrix()).unwrap();
        assert!(close(&a, dephase(&rho).matrix(), 1e-15));

        let mut rng = rng_from_seed(3);
        let ch = random_gio_with(&mut rng, 3, 3).unwrap();
        assert_eq!(ch.dual().dual(), *ch.map());
        let ops = (0..2).map(|_| random_unitary(&mut rng, 3).scale_real(0.5f64.sqrt())).collect();
        let mixed = KrausChannel::new(ops, None).unwrap();
        for seed in 0..5 {
            let rho = random_density(3, 3, seed).unwrap();
            let a = mixed.dual().dual().apply_matrix(rho.matrix()).unwrap();
            assert!(close(&a, &mixed.apply_matrix(rho.matrix()).unwrap(), 1e-14));
        }
        // Unitary mixtures are unital, so the dual is again a channel.
        assert!(mixed.dual_channel().is_ok());
        assert!(matches!(
            erasure_extension(2).unwrap().dual_channel(),
            Err(Error::NotUnital { .. })
        ));
    }

    #[test]
    fn selective_outcomes_examples() {
        let mut rng = rng_from_seed(4);
        let u = KrausChannel::unitary(random_unitary(&mut rng, 2), None).unwrap();
        let out = u.selective_outcomes(&plus()).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < 1e-14);

        let out = GioChannel::dephasing(2).selective_outcomes(&plus()).unwrap();
        assert_eq!(out.len(), 2);
        for (n, o) in out.iter().enumerate() {
            assert!((o.probability - 0.5).abs() < 1e-15);
            let basis = DensityMatrix::basis_state(2, n);
            assert!(close(o.post_state.as_ref().unwrap().matrix(), basis.matrix(), 1e-15));
        }

        let zero = DensityMatrix::basis_state(2, 0);
        let out = GioChannel::dephasing(2).selective_outcomes(&zero).unwrap();
        assert!(out[1].post_state.is_none() && out[1].probability == 0.0);

        for seed in 0..500u64 {
            let d = 2 + seed as usize % 3;
            let ch = random_gio_with(&mut rng, d, 1 + seed as usize % (d + 1)).unwrap();
            let rho = random_density_with(&mut rng, d, 1 + seed as usize % d).unwrap();
            let total: f64 = ch.selective_outcomes(&rho).unwrap().iter().map(|o| o.probability).sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gio_classification() {
        let mut rng = rng_from_seed(5);
        for d in 2..=5 {
            for m in 1..=d + 1 {
                let ch = random_gio_with(&mut rng, d, m).unwrap();
                assert!(is_gio(&ch, 1e-10));
                assert!(is_sio(&ch, 1e-10));
            }
        }
        assert!(!is_gio(&full_depolarizing(2), 1e-10));
        assert!(is_gio(&GioChannel::dephasing(4), 1e-12));
        assert!(matches!(
            GioChannel::try_from_channel(full_depolarizing(2), 1e-12),
            Err(Error::NotGio(_))
        ));
        let back = GioChannel::try_from_channel(GioChannel::dephasing(3).into_channel(), 1e-12).unwrap();
        assert_eq!(back, GioChannel::dephasing(3));
    }

    #[test]
    fn sio_classification() {
        let h = KrausChannel::unitary(hadamard(), None).unwrap();
        assert!(!is_sio(&h, 1e-10));
        // Direct check of the identity on |0⟩⟨0|: H|0⟩⟨0|H* is not diagonal.
        let e00 = ComplexMatrix::unit(2, 0, 0);
        let lhs = hadamard().sandwich(&e00);
        assert!(lhs.max_off_diagonal() > 0.4);
        // Permutations are SIO but not GIO.
        let x = ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let flip = KrausChannel::unitary(x, None).unwrap();
        assert!(is_sio(&flip, 1e-12));
        assert!(!is_gio(&flip, 1e-12));
    }

    #[test]
    fn is_sio_matches_the_brute_force_identity() {
        let brute = |ch: &KrausChannel, tol: f64| {
            let d = ch.dim();
            ch.kraus_ops().iter().all(|k| {
                (0..d).all(|n| {
                    (0..d).all(|m| {
                        let e = ComplexMatrix::unit(d, n, m);
                        let lhs = k.sandwich(&e.diagonal_part());
                        let rhs = k.sandwich(&e).diagonal_part();
                        (&lhs - &rhs).max_abs() <= tol
                    })
                })
            })
        };
        let mut rng = rng_from_seed(6);
        let mut channels = vec![
            depolarizing_extension(2).unwrap(),
            erasure_extension(2).unwrap(),
            full_depolarizing(2),
            KrausChannel::unitary(hadamard(), None).unwrap(),
            KrausChannel::unitary(random_unitary(&mut rng, 3), None).unwrap(),
        ];
        channels.push(random_gio_with(&mut rng, 3, 2).unwrap().into_channel());
        for ch in &channels {
            assert_eq!(is_sio(ch, 1e-10), brute(ch, 1e-10));
        }
    }

    #[test]
    fn random_gio_examples() {
        let ch = random_gio(3, 1, 7).unwrap();
        assert_eq!(ch.kraus_ops().len(), 1);
        assert!(ch.coefficients()[0].iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        assert_eq!(ch, random_gio(3, 1, 7).unwrap());
        assert!(random_gio(3, 0, 7).is_err());

        let mut rng = rng_from_seed(8);
        for _ in 0..50 {
            let ch = random_gio_with(&mut rng, 4, 3).unwrap();
            let delta = random_incoherent(&mut rng, 4);
            let out = ch.apply(&delta).unwrap();
            assert!(close(out.matrix(), delta.matrix(), 1e-12));
            for n in 0..4 {
                assert!((ch.overlap(n, n).re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gio_commutes_with_dephasing() {
        let mut rng = rng_from_seed(9);
        for _ in 0..100 {
            let ch = random_gio_with(&mut rng, 4, 3).unwrap();
            let rho = random_density_with(&mut rng, 4, 4).unwrap();
            let diff = dephase(&ch.apply(&rho).unwrap()).matrix() - dephase(&rho).matrix();
            assert!(trace_norm(&diff).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn diagonal_unitary_mixture_examples() {
        let ch = diagonal_unitary_mixture(&[1.0], &[vec![0.0, 0.0, 0.0]]).unwrap();
        assert!(close(&ch.kraus_ops()[0], &ComplexMatrix::identity(3), 0.0));

        let pi = std::f64::consts::PI;
        let ch = diagonal_unitary_mixture(&[0.5, 0.5], &[vec![0.0, 0.0], vec![0.0, pi]]).unwrap();
        assert!(is_gio(&ch, 1e-12));
        let rho = random_density(2, 2, 10).unwrap();
        // Oracle: ½ρ + ½ZρZ computed entrywise.
        let r = rho.matrix();
        let expected = ComplexMatrix::from_fn(2, 2, |i, j| if i == j { r[(i, j)] } else { C64::new(0.0, 0.0) });
        assert!(close(ch.apply(&rho).unwrap().matrix(), &expected, 1e-15));

        assert!(matches!(
            diagonal_unitary_mixture(&[0.5, 0.6], &[vec![0.0], vec![0.0]]),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(
            diagonal_unitary_mixture(&[1.5, -0.5], &[vec![0.0], vec![0.0]]),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(diagonal_unitary_mixture(&[1.0], &[]), Err(Error::BadWeights(_))));
    }

    #[test]
    fn extension_channels() {
        for d in 2..=3 {
            let rho = random_density(d, d, 11).unwrap();
            let zero = DensityMatrix::basis_state(d, 0);
            let mixed = DensityMatrix::maximally_mixed(d);

            let depol = depolarizing_extension(d).unwrap();
            let out = depol.apply_matrix(&tensor(rho.matrix(), zero.matrix())).unwrap();
            assert!(close(&out, &tensor(rho.matrix(), mixed.matrix()), 1e-14));
            assert!(!is_gio(&depol, 1e-10));
            assert!(is_sio(&depol, 1e-10));

            let erase = erasure_extension(d).unwrap();
            let out = erase.apply_matrix(&tensor(rho.matrix(), mixed.matrix())).unwrap();
            assert!(close(&out, &tensor(rho.matrix(), zero.matrix()), 1e-14));
            assert!(!is_gio(&erase, 1e-10));
            assert!(is_sio(&erase, 1e-10));
        }
        assert!(depolarizing_extension(1).is_err());
    }

    #[test]
    fn petz_examples() {
        let mut rng = rng_from_seed(12);
        let d = 3;
        let ops: Vec<ComplexMatrix> = [0.2, 0.3, 0.5]
            .iter()
            .map(|&w: &f64| random_unitary(&mut rng, d).scale_real(w.sqrt()))
            .collect();
        let unital = KrausChannel::new(ops, None).unwrap();
        let sigma = DensityMatrix::maximally_mixed(d);
        let r = petz_recovery(&unital, sigma.matrix()).unwrap();
        for seed in 0..20 {
            let rho = random_density(d, d, seed).unwrap();
            let out = unital.apply_matrix(rho.matrix()).unwrap();
            let expected = unital.dual().apply_matrix(&out).unwrap();
            assert!(close(&r.apply_matrix(&out).unwrap(), &expected, 1e-12));
        }

        let id = KrausChannel::identity(d);
        let rho = random_density(d, d, 13).unwrap();
        let r = petz_recovery(&id, rho.matrix()).unwrap();
        let omega = random_density(d, 2, 14).unwrap();
        assert!(close(&r.apply_matrix(omega.matrix()).unwrap(), omega.matrix(), 1e-12));

        for seed in 0..20 {
            let ch = random_gio(d, 2, seed).unwrap();
            let sigma = random_density(d, d, 100 + seed).unwrap();
            let r = petz_recovery(&ch, sigma.matrix()).unwrap();
            let back = r.apply_matrix(&ch.apply_matrix(sigma.matrix()).unwrap()).unwrap();
            assert!(close(&back, sigma.matrix(), 1e-10));
        }

        let pure = random_density(d, 1, 15).unwrap();
        assert!(matches!(petz_recovery(&id, pure.matrix()), Err(Error::SingularState { .. })));
        let erase = erasure_extension(2).unwrap();
        let full = DensityMatrix::maximally_mixed(4);
        assert!(matches!(petz_recovery(&erase, full.matrix()), Err(Error::SingularState { .. })));
    }

    #[test]
    fn saturation_examples() {
        let mut rng = rng_from_seed(16);
        let ch = random_gio_with(&mut rng, 3, 3).unwrap();
        let delta = random_incoherent(&mut rng, 3);
        assert!(gio_saturation_check(&ch, &delta, 1e-6).unwrap().saturates);

        let u = random_gio_with(&mut rng, 3, 1).unwrap();
        let rho = random_density(3, 3, 17).unwrap();
        let rep = gio_saturation_check(&u, &rho, 1e-6).unwrap();
        assert!(rep.saturates);
        assert!(rep.witness.unwrap().residual < 1e-12);

        let rep = gio_saturation_check(&split_projectors(), &plus(), 1e-6).unwrap();
        assert!(!rep.saturates);
        let w = rep.witness.unwrap();
        assert_eq!((w.n, w.m), (0, 1));
        assert_eq!(w.value, 0.0);
        assert!((w.coherence - 0.5).abs() < 1e-15);
        assert!((w.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recovery_defect_examples() {
        let d = recovery_defect(&split_projectors(), &plus()).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        assert!((d - dephasing_distance(&plus())).abs() < 1e-14);

        let mut rng = rng_from_seed(18);
        for _ in 0..20 {
            let ch = random_gio_with(&mut rng, 3, 2).unwrap();
            let delta = random_incoherent(&mut rng, 3);
            assert!(recovery_defect(&ch, &delta).unwrap() < 1e-12);
            let u = random_gio_with(&mut rng, 3, 1).unwrap();
            let rho = random_density_with(&mut rng, 3, 3).unwrap();
            assert!(recovery_defect(&u, &rho).unwrap() < 1e-8);
        }
        assert!(matches!(
            recovery_defect(&erasure_extension(2).unwrap(), &DensityMatrix::maximally_mixed(4)),
            Err(Error::NotUnital { .. })
        ));
    }
}
