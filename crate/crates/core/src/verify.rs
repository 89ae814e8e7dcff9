//! Seeded Monte-Carlo suites for the entropy and coherence theorems.
//!
//! Every trial draws its randomness from `derive_seed(master, [suite, d,
//! generator index, part, trial])`, so a report is a pure function of the
//! configuration and any worst case can be replayed from its seed alone.
//! Trials run in parallel and are folded in trial order.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{
    depolarizing_extension, erasure_extension, gio_saturation_check, is_sio, random_gio_with, GioChannel,
    KrausChannel,
};
use crate::coherence::{coherence, dephasing_distance, max_coherence, max_coherent_state, Variant};
use crate::divergence::{
    f_entropy, f_entropy_eigen, f_entropy_hat, f_entropy_hat_eigen, oracle_quasi_relative_entropy,
    quasi_relative_entropy,
};
use crate::error::{Error, Result};
use crate::generator::{GeneratorFunction, DEFAULT_GENERATORS};
use crate::matrix::{tensor, ComplexMatrix, DensityMatrix, C64};
use crate::random::{
    derive_seed, random_density_with, random_incoherent, random_probabilities, random_pure_with,
    random_unit_vector, random_unitary, rng_from_seed, TrialRng,
};

pub const SUITES: [&str; 6] = [
    "entropy-bounds",
    "gio-monotonicity",
    "strong-monotonicity",
    "sio-counterexample",
    "divergence-oracle",
    "faithfulness-bounds",
];

/// Overlap tolerance handed to the saturation predicate.
pub const SATURATION_TOL: f64 = 1e-6;
/// A coherence change at most this large counts as equality.
pub const EQUALITY_TOL: f64 = 1e-8;
/// Largest dimension for the d²×d² superoperator oracle.
pub const MAX_ORACLE_DIM: usize = 4;
/// Mixed-state strong monotonicity is enforced up to this dimension.
pub const MAX_ENFORCED_MIXED_DIM: usize = 2;
/// Weight of I/d mixed into oracle samples, bounding their spectrum below by this over d.
pub const ORACLE_SPECTRAL_FLOOR: f64 = 0.1;
/// Coherent samples in the faithfulness suite have some |ρ_nm| at least this large.
pub const MIN_COHERENT_ENTRY: f64 = 0.1;

const MAX_FAILURE_NOTES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialConfig {
    pub dims: Vec<usize>,
    pub trials_per_case: usize,
    pub seed: u64,
    pub f_list: Vec<String>,
    pub tol_violation: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 5],
            trials_per_case: 1000,
            seed: 1,
            f_list: DEFAULT_GENERATORS.iter().map(|s| s.to_string()).collect(),
            tol_violation: 1e-9,
        }
    }
}

impl TrialConfig {
    /// Checks the invariants and parses the generator list.
    pub fn validate(&self) -> Result<Vec<GeneratorFunction>> {
        if self.trials_per_case == 0 {
            return Err(Error::InvalidConfig("trials_per_case must be at least 1".into()));
        }
        if !(self.tol_violation > 0.0) || !self.tol_violation.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "tol_violation must be positive, got {}",
                self.tol_violation
            )));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidConfig("dims must be a non-empty list of positive integers".into()));
        }
        if self.f_list.is_empty() {
            return Err(Error::InvalidConfig("f_list is empty".into()));
        }
        self.f_list.iter().map(|s| s.parse()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub pass: bool,
    pub trials: u64,
    pub worst_violation: f64,
    pub worst_case_seed: u64,
    pub notes: Vec<String>,
}

/// A trial that could not be evaluated or broke a discrete property.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type Check = std::result::Result<f64, Failure>;

#[derive(Default)]
struct Tally {
    trials: u64,
    worst: Option<(f64, u64)>,
    notes: Vec<String>,
    failures: Vec<String>,
    failure_count: usize,
}

impl Tally {
    fn record(&mut self, violation: f64, seed: u64) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        self.trials += 1;
        if self.worst.is_none_or(|(w, _)| v > w) {
            self.worst = Some((v, seed));
        }
    }

    fn fail(&mut self, seed: u64, message: String) {
        self.record(1.0, seed);
        self.failure_count += 1;
        if self.failures.len() < MAX_FAILURE_NOTES {
            self.failures.push(format!("seed {seed}: {message}"));
        }
    }

    fn note(&mut self, message: String) {
        self.notes.push(message);
    }

    fn absorb(&mut self, label: &str, results: Vec<(u64, Check)>) {
        for (seed, r) in results {
            match r {
                Ok(v) => self.record(v, seed),
                Err(Failure(msg)) => self.fail(seed, format!("{label}: {msg}")),
            }
        }
    }

    fn finish(mut self, suite: &str, tol: f64) -> VerificationReport {
        let (worst, seed) = self.worst.unwrap_or((0.0, 0));
        let worst_violation = if worst.is_finite() { worst.max(0.0) } else { f64::MAX };
        self.notes.append(&mut self.failures);
        if self.failure_count > MAX_FAILURE_NOTES {
            self.notes
                .push(format!("{} further failures not listed", self.failure_count - MAX_FAILURE_NOTES));
        }
        VerificationReport {
            suite: suite.to_owned(),
            pass: worst_violation <= tol,
            trials: self.trials,
            worst_violation,
            worst_case_seed: seed,
            notes: self.notes,
        }
    }
}

/// Identifies one batch of trials for seed derivation.
#[derive(Clone, Copy)]
struct Case {
    suite: u64,
    d: usize,
    f_index: usize,
    part: u64,
}

impl Case {
    fn seed(&self, master: u64, trial: usize) -> u64 {
        derive_seed(master, &[self.suite, self.d as u64, self.f_index as u64, self.part, trial as u64])
    }
}

fn run_trials<F>(cfg: &TrialConfig, case: Case, trial: F) -> Vec<(u64, Check)>
where
    F: Fn(usize, &mut TrialRng) -> Check + Sync,
{
    (0..cfg.trials_per_case)
        .into_par_iter()
        .map(|t| {
            let seed = case.seed(cfg.seed, t);
            (seed, trial(t, &mut rng_from_seed(seed)))
        })
        .collect()
}

fn suite_index(name: &str) -> u64 {
    SUITES.iter().position(|s| *s == name).expect("registered suite") as u64
}

/// Generators the coherence theorems apply to; the rest are noted and skipped.
fn theorem_generators(fs: &[GeneratorFunction], tally: &mut Tally) -> Vec<(usize, GeneratorFunction)> {
    let mut kept = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        if f.claims_monotone_decreasing() {
            kept.push((i, *f));
        } else {
            tally.note(format!("skipped {f}: not monotone decreasing"));
        }
    }
    kept
}

fn random_rank(rng: &mut TrialRng, d: usize) -> usize {
    rng.random_range(1..=d)
}

fn random_state(rng: &mut TrialRng, d: usize) -> Result<DensityMatrix> {
    let rank = random_rank(rng, d);
    random_density_with(rng, d, rank)
}

fn mixed_state(rng: &mut TrialRng, d: usize) -> Result<DensityMatrix> {
    let rank = if d >= 2 { rng.random_range(2..=d) } else { 1 };
    random_density_with(rng, d, rank)
}

fn random_kraus_count(rng: &mut TrialRng, d: usize) -> usize {
    rng.random_range(1..=d + 1)
}

fn coherence_value(rho: &DensityMatrix, f: &GeneratorFunction, v: Variant) -> Result<f64> {
    Ok(coherence(rho, f, v)?.value)
}

/// Σ_n p_n C̃_f(ρ_n) − C̃_f(ρ) over the selective outcomes of `ch`; positive means a violation.
pub fn strong_monotonicity_excess(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    f: &GeneratorFunction,
    variant: Variant,
) -> Result<f64> {
    let before = coherence_value(rho, f, variant)?;
    let mut average = 0.0;
    for outcome in ch.selective_outcomes(rho)? {
        if let Some(post) = &outcome.post_state {
            average += outcome.probability * coherence_value(post, f, variant)?;
        }
    }
    Ok(average - before)
}

// ---------------------------------------------------------------------------
// entropy-bounds

fn entropy_trial(rng: &mut TrialRng, d: usize, f: &GeneratorFunction) -> Check {
    let plain_max = f.eval(1.0 / d as f64);
    let hat_max = -f.eval(d as f64);
    let entropies = |rho: &DensityMatrix| -> Result<(f64, f64)> { Ok((f_entropy(rho, f)?, f_entropy_hat(rho, f)?)) };

    let rho = random_state(rng, d)?;
    let (s, sh) = entropies(&rho)?;
    let mut v = [-s, s - plain_max, -sh, sh - hat_max]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    v = v
        .max((s - f_entropy_eigen(&rho, f)?).abs())
        .max((sh - f_entropy_hat_eigen(&rho, f)?).abs());

    let pure = random_pure_with(rng, d).as_density();
    let (p, ph) = entropies(&pure)?;
    v = v.max(p.abs()).max(ph.abs());

    let sigma = random_state(rng, d)?;
    let t: f64 = rng.random();
    let mix = DensityMatrix::new(&(&rho.matrix().scale_real(t) + &sigma.matrix().scale_real(1.0 - t)))?;
    let (s2, sh2) = entropies(&sigma)?;
    let (sm, shm) = entropies(&mix)?;
    v = v.max(t * s + (1.0 - t) * s2 - sm).max(t * sh + (1.0 - t) * sh2 - shm);

    let u = random_unitary(rng, d);
    let rotated = DensityMatrix::new(&u.sandwich(rho.matrix()))?;
    let (sr, shr) = entropies(&rotated)?;
    v = v.max((sr - s).abs()).max((shr - sh).abs());

    let w: f64 = rng.random();
    let ops = vec![
        random_unitary(rng, d).scale_real(w.sqrt()),
        random_unitary(rng, d).scale_real((1.0 - w).sqrt()),
    ];
    let unital = KrausChannel::new(ops, None)?;
    let (su, shu) = entropies(&unital.apply(&rho)?)?;
    v = v.max(s - su).max(sh - shu);
    Ok(v)
}

pub fn suite_entropy_bounds(cfg: &TrialConfig) -> Result<VerificationReport> {
    let name = "entropy-bounds";
    let fs = cfg.validate()?;
    let mut tally = Tally::default();
    for (fi, f) in theorem_generators(&fs, &mut tally) {
        for &d in &cfg.dims {
            let case = Case { suite: suite_index(name), d, f_index: fi, part: 0 };
            let mixed = DensityMatrix::maximally_mixed(d);
            let attained = (f_entropy(&mixed, &f)? - f.eval(1.0 / d as f64))
                .abs()
                .max((f_entropy_hat(&mixed, &f)? + f.eval(d as f64)).abs());
            tally.record(attained, case.seed(cfg.seed, usize::MAX));
            let results = run_trials(cfg, case, |_, rng| entropy_trial(rng, d, &f));
            tally.absorb(&format!("{f} d={d}"), results);
        }
    }
    Ok(tally.finish(name, cfg.tol_violation))
}

// ---------------------------------------------------------------------------
// gio-monotonicity

/// k_jn = v_j e^{iθ_n} on `block`, independent unit columns elsewhere.
fn block_collinear_gio(rng: &mut TrialRng, d: usize, m: usize, block: &[bool]) -> Result<GioChannel> {
    let shared = random_unit_vector(rng, m);
    let columns: Vec<Vec<C64>> = (0..d)
        .map(|n| {
            if block[n] {
                let phase = C64::from_polar(1.0, rng.random::<f64>() * TAU);
                shared.iter().map(|&z| z * phase).collect()
            } else {
                random_unit_vector(rng, m)
            }
        })
        .collect();
    let table = (0..m).map(|j| (0..d).map(|n| columns[n][j]).collect()).collect();
    GioChannel::from_coefficients(table, None)
}

/// Removes every coherence ρ_nm unless both n and m lie in `block`.
fn pinch_outside(rho: &DensityMatrix, block: &[bool]) -> Result<DensityMatrix> {
    let r = rho.matrix();
    let d = rho.dim();
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j || (block[i] && block[j]) {
            r[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityMatrix::new(&m)
}

fn gio_monotonicity_trial(rng: &mut TrialRng, t: usize, d: usize, f: &GeneratorFunction) -> Check {
    let m = random_kraus_count(rng, d);
    let mut rho = random_state(rng, d)?;
    let ch = match t % 4 {
        0 => block_collinear_gio(rng, d, m, &vec![true; d])?,
        1 => {
            let block: Vec<bool> = (0..d).map(|_| rng.random::<bool>()).collect();
            rho = pinch_outside(&rho, &block)?;
            block_collinear_gio(rng, d, m, &block)?
        }
        _ => random_gio_with(rng, d, m)?,
    };
    let saturates = gio_saturation_check(&ch, &rho, SATURATION_TOL)?.saturates;
    let out = ch.apply(&rho)?;
    let mut v = f64::NEG_INFINITY;
    for variant in Variant::BOTH {
        let decrease = coherence_value(&rho, f, variant)? - coherence_value(&out, f, variant)?;
        v = v.max(-decrease);
        if saturates && decrease.abs() > EQUALITY_TOL {
            return Err(Failure(format!(
                "saturating channel changed {variant} coherence by {decrease:e}"
            )));
        }
        if !saturates && decrease <= EQUALITY_TOL {
            return Err(Failure(format!(
                "non-saturating channel decreased {variant} coherence by only {decrease:e}"
            )));
        }
    }
    Ok(v)
}

pub fn suite_gio_monotonicity(cfg: &TrialConfig) -> Result<VerificationReport> {
    let name = "gio-monotonicity";
    let fs = cfg.validate()?;
    let mut tally = Tally::default();
    for (fi, f) in theorem_generators(&fs, &mut tally) {
        for &d in &cfg.dims {
            let case = Case { suite: suite_index(name), d, f_index: fi, part: 0 };
            let results = run_trials(cfg, case, |t, rng| gio_monotonicity_trial(rng, t, d, &f));
            tally.absorb(&format!("{f} d={d}"), results);
        }
    }
    Ok(tally.finish(name, cfg.tol_violation))
}

// ---------------------------------------------------------------------------
// strong-monotonicity

fn strong_excess_both(ch: &KrausChannel, rho: &DensityMatrix, f: &GeneratorFunction) -> Result<f64> {
    Ok(strong_monotonicity_excess(ch, rho, f, Variant::Plain)?
        .max(strong_monotonicity_excess(ch, rho, f, Variant::Hat)?))
}

fn pure_state_trial(rng: &mut TrialRng, d: usize, f: &GeneratorFunction) -> Check {
    let rho = random_pure_with(rng, d).as_density();
    let m = random_kraus_count(rng, d);
    let ch = random_gio_with(rng, d, m)?;
    Ok(strong_excess_both(&ch, &rho, f)?)
}

fn unitary_mixture_trial(rng: &mut TrialRng, d: usize, f: &GeneratorFunction) -> Check {
    let rho = random_state(rng, d)?;
    let m = random_kraus_count(rng, d);
    let weights = random_probabilities(rng, m);
    let phases: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.random::<f64>() * TAU).collect()).collect();
    let ch = crate::channels::diagonal_unitary_mixture(&weights, &phases)?;
    let mut v = 0.0f64;
    for variant in Variant::BOTH {
        v = v.max(strong_monotonicity_excess(&ch, &rho, f, variant)?.abs());
    }
    Ok(v)
}

fn mixed_state_trial(rng: &mut TrialRng, d: usize, f: &GeneratorFunction) -> Check {
    let rho = mixed_state(rng, d)?;
    let m = random_kraus_count(rng, d);
    let ch = random_gio_with(rng, d, m)?;
    Ok(strong_excess_both(&ch, &rho, f)?)
}

pub fn suite_strong_monotonicity(cfg: &TrialConfig) -> Result<VerificationReport> {
    let name = "strong-monotonicity";
    let fs = cfg.validate()?;
    let mut tally = Tally::default();
    let suite = suite_index(name);
    for (fi, f) in theorem_generators(&fs, &mut tally) {
        for &d in &cfg.dims {
            let case = |part| Case { suite, d, f_index: fi, part };
            let results = run_trials(cfg, case(0), |_, rng| pure_state_trial(rng, d, &f));
            tally.absorb(&format!("pure states {f} d={d}"), results);
            let results = run_trials(cfg, case(1), |_, rng| unitary_mixture_trial(rng, d, &f));
            tally.absorb(&format!("diagonal-unitary mixtures {f} d={d}"), results);

            if d < 2 {
                continue;
            }
            let results = run_trials(cfg, case(2), |_, rng| mixed_state_trial(rng, d, &f));
            let label = format!("mixed states {f} d={d}");
            if d <= MAX_ENFORCED_MIXED_DIM {
                tally.absorb(&label, results);
            } else {
                let mut explore = Tally::default();
                explore.absorb(&label, results);
                let report = explore.finish(name, cfg.tol_violation);
                tally.note(format!(
                    "exploration, {label}: worst violation {:.3e} at seed {} over {} trials",
                    report.worst_violation, report.worst_case_seed, report.trials
                ));
            }
        }
    }
    Ok(tally.finish(name, cfg.tol_violation))
}

// ---------------------------------------------------------------------------
// sio-counterexample

/// C̃_f(ρ⊗I/d) and C̃_f(ρ⊗|0⟩⟨0|) for one variant, computed directly and from
/// the eigenvalue identities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SioGap {
    pub variant: Variant,
    /// C̃_f(ρ ⊗ I/d).
    pub lhs: f64,
    /// C̃_f(ρ ⊗ |0⟩⟨0|).
    pub rhs: f64,
    pub gap: f64,
    pub lhs_identity: f64,
    pub rhs_identity: f64,
}

impl SioGap {
    /// Largest disagreement between the direct and the eigenvalue routes.
    pub fn identity_error(&self) -> f64 {
        (self.lhs - self.lhs_identity)
            .abs()
            .max((self.rhs - self.rhs_identity).abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SioCounterexample {
    pub f_name: String,
    pub d: usize,
    pub plain: SioGap,
    pub hat: SioGap,
}

impl SioCounterexample {
    pub fn gap(&self) -> f64 {
        self.plain.gap.max(self.hat.gap)
    }
}

fn weighted_sum(p: &[f64], c: f64, f: &GeneratorFunction, context: &'static str) -> Result<f64> {
    crate::divergence::perspective_sum(p, c, f, context)
}

/// Compares C̃_f(ρ⊗I/d) with C̃_f(ρ⊗|0⟩⟨0|); ρ defaults to the maximally coherent state.
///
/// Equality of the two is forced by monotonicity under the SIO maps
/// [`depolarizing_extension`] and [`erasure_extension`], which send each
/// extension to the other.
pub fn sio_counterexample_report(
    f: &GeneratorFunction,
    d: usize,
    rho: Option<&DensityMatrix>,
) -> Result<SioCounterexample> {
    if d < 2 {
        return Err(Error::InvalidConfig(format!("extension dimension must be at least 2, got {d}")));
    }
    let default_state;
    let rho = match rho {
        Some(r) => r,
        None => {
            default_state = max_coherent_state(d).as_density();
            &default_state
        }
    };
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let (with_mixed, with_zero) = tensor_extensions(rho)?;
    let lambda = rho.eigenvalues();
    let chi = rho.diagonal();
    let df = d as f64;

    let gap_for = |variant: Variant| -> Result<SioGap> {
        let lhs = coherence_value(&with_mixed, f, variant)?;
        let rhs = coherence_value(&with_zero, f, variant)?;
        // ρ⊗I/d has spectrum λ_j/d and diagonal χ_j/d, each d-fold; ρ⊗|0⟩⟨0| pads with zeros.
        let (c_mixed, c_zero) = match variant {
            Variant::Plain => (1.0 / df, 1.0 / (df * df)),
            Variant::Hat => (df, 1.0),
        };
        let lhs_identity = weighted_sum(lambda, c_mixed, f, "extension (eigenvalues)")?
            - weighted_sum(&chi, c_mixed, f, "extension (diagonal)")?;
        let rhs_identity = weighted_sum(lambda, c_zero, f, "extension (eigenvalues)")?
            - weighted_sum(&chi, c_zero, f, "extension (diagonal)")?;
        Ok(SioGap {
            variant,
            lhs,
            rhs,
            gap: (lhs - rhs).abs(),
            lhs_identity,
            rhs_identity,
        })
    };
    Ok(SioCounterexample {
        f_name: f.name(),
        d,
        plain: gap_for(Variant::Plain)?,
        hat: gap_for(Variant::Hat)?,
    })
}

/// (ρ⊗I/d, ρ⊗|0⟩⟨0|).
pub fn tensor_extensions(rho: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    let d = rho.dim();
    let mixed = DensityMatrix::maximally_mixed(d);
    let zero = DensityMatrix::basis_state(d, 0);
    Ok((
        DensityMatrix::new(&tensor(rho.matrix(), mixed.matrix()))?,
        DensityMatrix::new(&tensor(rho.matrix(), zero.matrix()))?,
    ))
}

fn is_log(f: &GeneratorFunction) -> bool {
    *f == GeneratorFunction::neg_log()
}

/// Both extension channels are SIO and map the two extensions onto each other.
fn extension_channel_error(rho: &DensityMatrix, tol: f64) -> Check {
    let d = rho.dim();
    let depol = depolarizing_extension(d)?;
    let erase = erasure_extension(d)?;
    for ch in [&depol, &erase] {
        if !is_sio(ch, tol) {
            return Err(Failure(format!("{} is not SIO", ch.label().unwrap_or("channel"))));
        }
    }
    let (with_mixed, with_zero) = tensor_extensions(rho)?;
    let a = (&depol.apply_matrix(with_zero.matrix())? - with_mixed.matrix()).max_abs();
    let b = (&erase.apply_matrix(with_mixed.matrix())? - with_zero.matrix()).max_abs();
    Ok(a.max(b))
}

fn sio_case_check(f: &GeneratorFunction, d: usize, rho: &DensityMatrix) -> Check {
    let report = sio_counterexample_report(f, d, Some(rho))?;
    let mut v = report.plain.identity_error().max(report.hat.identity_error());
    if is_log(f) || crate::coherence::is_incoherent(rho, 0.0) {
        v = v.max(report.gap());
    }
    Ok(v)
}

pub fn suite_sio_counterexample(cfg: &TrialConfig) -> Result<VerificationReport> {
    let name = "sio-counterexample";
    let fs = cfg.validate()?;
    let tol = cfg.tol_violation;
    let mut tally = Tally::default();
    let suite = suite_index(name);
    for &d in &cfg.dims {
        if d < 2 {
            tally.note(format!("skipped d={d}: extensions need d >= 2"));
            continue;
        }
        let reference = max_coherent_state(d).as_density();
        let seed = Case { suite, d, f_index: usize::MAX, part: 0 }.seed(cfg.seed, 0);
        match extension_channel_error(&reference, tol) {
            Ok(v) => tally.record(v, seed),
            Err(Failure(msg)) => tally.fail(seed, format!("extension channels d={d}: {msg}")),
        }
    }
    for (fi, f) in theorem_generators(&fs, &mut tally) {
        for &d in cfg.dims.iter().filter(|&&d| d >= 2) {
            let case = |part| Case { suite, d, f_index: fi, part };
            let seed = case(0).seed(cfg.seed, 0);
            let report = sio_counterexample_report(&f, d, None)?;
            let mut v = report.plain.identity_error().max(report.hat.identity_error());
            if is_log(&f) {
                v = v.max(report.gap());
            } else if report.gap() <= 10.0 * tol {
                tally.fail(seed, format!("{f} d={d}: gap {:.3e} does not separate", report.gap()));
            }
            tally.record(v, seed);
            tally.note(format!(
                "{f} d={d}: plain gap {:.9e}, hat gap {:.9e}",
                report.plain.gap, report.hat.gap
            ));

            let results = run_trials(cfg, case(1), |t, rng| {
                let rho = if t % 4 == 0 { random_incoherent(rng, d) } else { random_state(rng, d)? };
                sio_case_check(&f, d, &rho)
            });
            tally.absorb(&format!("{f} d={d}"), results);
        }
    }
    Ok(tally.finish(name, tol))
}

// ---------------------------------------------------------------------------
// divergence-oracle

/// (1 − s) W + s I/d with W full rank and s ∈ [0.1, 1): every eigenvalue is at least 0.1/d.
fn well_conditioned_state(rng: &mut TrialRng, d: usize) -> Result<DensityMatrix> {
    let w = random_density_with(rng, d, d)?;
    let s = ORACLE_SPECTRAL_FLOOR + (1.0 - ORACLE_SPECTRAL_FLOOR) * rng.random::<f64>();
    let mixed = DensityMatrix::maximally_mixed(d);
    DensityMatrix::new(&(&w.matrix().scale_real(1.0 - s) + &mixed.matrix().scale_real(s)))
}

fn oracle_trial(rng: &mut TrialRng, t: usize, d: usize, f: &GeneratorFunction) -> Check {
    let a = well_conditioned_state(rng, d)?;
    let b = match t % 4 {
        0 => a.clone(),
        1 => {
            // Commuting pair: both diagonal in the same random basis.
            let u = random_unitary(rng, d);
            let p = random_probabilities(rng, d);
            let q = random_probabilities(rng, d);
            let a = DensityMatrix::new(&u.sandwich(&ComplexMatrix::from_real_diagonal(&p)))?;
            let b = DensityMatrix::new(&u.sandwich(&ComplexMatrix::from_real_diagonal(&q)))?;
            let classical: f64 = p.iter().zip(&q).map(|(&p, &q)| p * f.eval(q / p)).sum();
            let spectral = quasi_relative_entropy(&a, &b, f)?.to_f64();
            let oracle = oracle_quasi_relative_entropy(&a, &b, f)?.to_f64();
            return Ok((spectral - oracle).abs().max((spectral - classical).abs()));
        }
        _ => well_conditioned_state(rng, d)?,
    };
    let spectral = quasi_relative_entropy(&a, &b, f)?.to_f64();
    let oracle = oracle_quasi_relative_entropy(&a, &b, f)?.to_f64();
    let mut v = (spectral - oracle).abs();
    if t.is_multiple_of(4) {
        v = v.max(spectral.abs()).max(oracle.abs());
    }
    Ok(v)
}

pub fn suite_divergence_oracle(cfg: &TrialConfig) -> Result<VerificationReport> {
    let name = "divergence-oracle";
    let fs = cfg.validate()?;
    let mut tally = Tally::default();
    tally.note(format!(
        "full-rank pairs are mixed with I/d at weight >= {ORACLE_SPECTRAL_FLOOR}; the superoperator route loses accuracy like 1/min eigenvalue"
    ));
    for &d in cfg.dims.iter().filter(|&&d| d > MAX_ORACLE_DIM) {
        tally.note(format!("skipped d={d}: oracle limited to d <= {MAX_ORACLE_DIM}"));
    }
    for (fi, f) in fs.iter().enumerate() {
        for &d in cfg.dims.iter().filter(|&&d| d <= MAX_ORACLE_DIM) {
            let case = Case { suite: suite_index(name), d, f_index: fi, part: 0 };
            let results = run_trials(cfg, case, |t, rng| oracle_trial(rng, t, d, f));
            tally.absorb(&format!("{f} d={d}"), results);
        }
    }
    Ok(tally.finish(name, cfg.tol_violation))
}

// ---------------------------------------------------------------------------
// faithfulness-bounds

fn coherent_state(rng: &mut TrialRng, d: usize) -> std::result::Result<DensityMatrix, Failure> {
    for _ in 0..10_000 {
        let rho = random_state(rng, d)?;
        if rho.matrix().max_off_diagonal() >= MIN_COHERENT_ENTRY {
            return Ok(rho);
        }
    }
    Err(Failure(format!("no state with an entry of size {MIN_COHERENT_ENTRY} found")))
}

fn faithfulness_trial(rng: &mut TrialRng, d: usize, f: &GeneratorFunction, tol: f64) -> Check {
    let mut v = f64::NEG_INFINITY;
    let delta = random_incoherent(rng, d);
    for variant in Variant::BOTH {
        v = v.max(coherence_value(&delta, f, variant)?.abs());
    }
    if dephasing_distance(&delta) != 0.0 {
        return Err(Failure("incoherent state has non-zero dephasing distance".into()));
    }
    if d < 2 {
        return Ok(v);
    }

    let rho = coherent_state(rng, d)?;
    let distance = dephasing_distance(&rho);
    if !(distance > 0.0) {
        return Err(Failure("coherent state has zero dephasing distance".into()));
    }
    for variant in Variant::BOTH {
        let c = coherence_value(&rho, f, variant)?;
        if !(c > tol) {
            return Err(Failure(format!("coherent state has {variant} coherence {c:e}")));
        }
        v = v.max(c - max_coherence(f, d, variant));
    }

    let any = random_state(rng, d)?;
    let zero_distance = dephasing_distance(&any) <= tol;
    for variant in Variant::BOTH {
        let c = coherence_value(&any, f, variant)?;
        v = v.max(-c);
        if (c.abs() <= tol) != zero_distance {
            return Err(Failure(format!(
                "{variant} coherence {c:e} disagrees with dephasing distance {:e}",
                dephasing_distance(&any)
            )));
        }
    }
    Ok(v)
}

pub fn suite_faithfulness_and_bounds(cfg: &TrialConfig) -> Result<VerificationReport> {
    let name = "faithfulness-bounds";
    let fs = cfg.validate()?;
    let mut tally = Tally::default();
    for (fi, f) in theorem_generators(&fs, &mut tally) {
        for &d in &cfg.dims {
            let case = Case { suite: suite_index(name), d, f_index: fi, part: 0 };
            let psi = max_coherent_state(d).as_density();
            let mut attained = 0.0f64;
            for variant in Variant::BOTH {
                attained = attained.max((coherence_value(&psi, &f, variant)? - max_coherence(&f, d, variant)).abs());
            }
            tally.record(attained, case.seed(cfg.seed, usize::MAX));
            let results = run_trials(cfg, case, |_, rng| faithfulness_trial(rng, d, &f, cfg.tol_violation));
            tally.absorb(&format!("{f} d={d}"), results);
        }
    }
    Ok(tally.finish(name, cfg.tol_violation))
}

// ---------------------------------------------------------------------------

pub fn run_suite(name: &str, cfg: &TrialConfig) -> Result<VerificationReport> {
    match name {
        "entropy-bounds" => suite_entropy_bounds(cfg),
        "gio-monotonicity" => suite_gio_monotonicity(cfg),
        "strong-monotonicity" => suite_strong_monotonicity(cfg),
        "sio-counterexample" => suite_sio_counterexample(cfg),
        "divergence-oracle" => suite_divergence_oracle(cfg),
        "faithfulness-bounds" => suite_faithfulness_and_bounds(cfg),
        other => Err(Error::InvalidConfig(format!(
            "unknown suite `{other}` (expected one of {} or all)",
            SUITES.join(", ")
        ))),
    }
}

/// Every suite in [`SUITES`] order.
pub fn run_all(cfg: &TrialConfig) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    SUITES.iter().map(|s| run_suite(s, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dims: Vec<usize>, trials: usize) -> TrialConfig {
        TrialConfig {
            dims,
            trials_per_case: trials,
            ..TrialConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrialConfig::default().validate().is_ok());
        let bad = |cfg: TrialConfig| matches!(cfg.validate(), Err(Error::InvalidConfig(_)));
        assert!(bad(small(vec![2], 0)));
        assert!(bad(small(vec![], 1)));
        assert!(bad(TrialConfig { tol_violation: 0.0, ..small(vec![2], 1) }));
        let unknown = TrialConfig { f_list: vec!["cosh".into()], ..small(vec![2], 1) };
        assert!(matches!(unknown.validate(), Err(Error::UnknownGenerator(_))));
        assert!(matches!(run_suite("nope", &small(vec![2], 1)), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn suites_pass_on_small_configs() {
        let cfg = small(vec![2, 3], 40);
        for report in run_all(&cfg).unwrap() {
            assert!(report.pass, "{report:?}");
            assert!(report.trials > 0);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small(vec![2, 3], 10);
        assert_eq!(run_all(&cfg).unwrap(), run_all(&cfg).unwrap());
        let other = TrialConfig { seed: 2, ..cfg.clone() };
        assert_ne!(run_all(&cfg).unwrap(), run_all(&other).unwrap());
    }

    #[test]
    fn non_decreasing_generators_are_skipped() {
        let cfg = TrialConfig {
            f_list: vec!["power:1.5".into(), "neg_log".into()],
            ..small(vec![2], 5)
        };
        let report = suite_gio_monotonicity(&cfg).unwrap();
        assert!(report.notes.iter().any(|n| n.contains("skipped power:1.5")));
        assert_eq!(report.trials, 5);
        let oracle = suite_divergence_oracle(&cfg).unwrap();
        assert_eq!(oracle.trials, 10);
    }

    #[test]
    fn sio_gap_regression_constants() {
        let sqrt2 = std::f64::consts::SQRT_2;
        let f = GeneratorFunction::power(0.5).unwrap();
        let r = sio_counterexample_report(&f, 2, None).unwrap();
        assert!((r.plain.lhs - (4.0 - 2.0 * sqrt2)).abs() < 1e-12);
        assert!((r.plain.rhs - (2.0 * sqrt2 - 2.0)).abs() < 1e-12);
        assert!((r.plain.gap - (6.0 - 4.0 * sqrt2)).abs() < 1e-12);
        assert!((r.hat.lhs - (8.0 - 4.0 * sqrt2)).abs() < 1e-12);
        assert!((r.hat.rhs - 4.0 * (sqrt2 - 1.0)).abs() < 1e-12);
        assert!((r.hat.gap - (12.0 - 8.0 * sqrt2)).abs() < 1e-12);
        assert!(r.plain.identity_error() < 1e-12 && r.hat.identity_error() < 1e-12);

        let log = sio_counterexample_report(&GeneratorFunction::neg_log(), 2, None).unwrap();
        assert!(log.gap() < 1e-12);
        let diag = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!(sio_counterexample_report(&f, 2, Some(&diag)).unwrap().gap() < 1e-12);
        assert!(matches!(
            sio_counterexample_report(&f, 3, Some(&diag)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mixed_state_strong_monotonicity_fails_for_a_three_level_gio() {
        // Replays an exploration worst case: a random GIO given by its own Kraus
        // operators, acting on a rank-2 or rank-3 state in d = 3.
        let f = GeneratorFunction::tsallis(1.5).unwrap();
        let mut rng = rng_from_seed(15461057898028952487);
        let rho = mixed_state(&mut rng, 3).unwrap();
        let m = random_kraus_count(&mut rng, 3);
        let ch = random_gio_with(&mut rng, 3, m).unwrap();
        assert!(crate::channels::is_gio(&ch, 1e-10));
        assert!(rho.rank() >= 2);

        // Independent evaluation of Σ p_n C(ρ_n) − C(ρ) from the Kraus operators.
        let plain = |r: &DensityMatrix| coherence(r, &f, Variant::Plain).unwrap().value;
        let mut average = 0.0;
        for k in ch.kraus_ops() {
            let branch = k.sandwich(rho.matrix());
            let p = branch.trace().re;
            let post = DensityMatrix::new(&branch.scale_real(1.0 / p)).unwrap();
            average += p * plain(&post);
        }
        let excess = average - plain(&rho);
        assert!(excess > 1e-2, "excess {excess}");
        assert!((excess - strong_monotonicity_excess(&ch, &rho, &f, Variant::Plain).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn worst_case_seed_replays() {
        let cfg = small(vec![3], 30);
        let report = suite_gio_monotonicity(&cfg).unwrap();
        let f = GeneratorFunction::neg_log();
        // Replaying every trial seed of the first case reproduces the recorded worst value.
        let case = Case { suite: suite_index("gio-monotonicity"), d: 3, f_index: 0, part: 0 };
        let worst = (0..30)
            .map(|t| gio_monotonicity_trial(&mut rng_from_seed(case.seed(cfg.seed, t)), t, 3, &f).ok().unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst.max(0.0) <= report.worst_violation);
    }
}
