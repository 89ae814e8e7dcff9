//! Seeded generators for test states, unitaries and probability vectors.
//!
//! Every generator is a pure function of its seed (or of the RNG passed in).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DensityMatrix, PureState, C64};

pub type TrialRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One splitmix64 step; used to derive independent sub-seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a seed from a master seed and a sequence of stream labels.
pub fn derive_seed(master: u64, streams: &[u64]) -> u64 {
    streams
        .iter()
        .fold(splitmix64(master), |acc, &s| splitmix64(acc ^ splitmix64(s)))
}

/// Complex standard normal: real and imaginary parts N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unit vector in ℂ^d.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_pure_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PureState {
    PureState::normalized(random_unit_vector(rng, d)).expect("nonzero Gaussian vector")
}

/// Haar-distributed pure state in dimension `d`.
pub fn random_pure(d: usize, seed: u64) -> PureState {
    random_pure_with(&mut rng_from_seed(seed), d)
}

pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let g = ComplexMatrix::from_fn(d, rank, |_, _| complex_gaussian(rng));
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(&w.scale_real(1.0 / tr))
}

/// G G*/Tr(G G*) with G a d×rank complex Gaussian matrix.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut rng_from_seed(seed), d, rank)
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of R's diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.as_dmatrix().clone().qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<C64> = (0..d)
        .map(|i| {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(d, d, |i, j| q[(i, j)] * phases[j])
}

/// Uniform point on the probability simplex (flat Dirichlet).
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Random diagonal state.
pub fn random_incoherent<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    DensityMatrix::from_diagonal(&random_probabilities(rng, d)).expect("simplex point is a state")
}

/// Random Hermitian matrix with Gaussian entries (GUE-like), not normalized.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    (&g + &g.adjoint()).scale_real(0.5)
}
