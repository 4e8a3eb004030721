//! Seeded randomness: stream derivation, POVM sampling and Haar unitaries.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`), a counter-based
//! stream cipher whose output is identical on every platform. Seeds are
//! expanded to the 32-byte ChaCha key with SplitMix64.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{QpvError, Result};
use crate::qcore::operator::Operator;
use crate::qcore::state::{DensityMatrix, Povm};

pub type QpvRng = ChaCha20Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SAMPLING_TOL: f64 = 1e-8;

/// One SplitMix64 output step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `stream`: `splitmix64(seed + (stream + 1) * gamma)`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// ChaCha20 keyed by four successive SplitMix64 outputs of `seed`.
pub fn rng_from_seed(seed: u64) -> QpvRng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        let word = splitmix64(state);
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha20Rng::from_seed(key)
}

/// Cumulative table for drawing from a fixed discrete distribution.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    /// Accepts probabilities that sum to one within `1e-8`; small negative
    /// entries are clipped and the rest renormalized.
    pub fn new(probabilities: &[f64]) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(QpvError::InvalidArgument("empty distribution".into()));
        }
        if let Some(p) = probabilities.iter().find(|&&p| p < -SAMPLING_TOL || !p.is_finite()) {
            return Err(QpvError::InvalidArgument(format!("probability {p:e} out of range")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SAMPLING_TOL {
            return Err(QpvError::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let clipped: Vec<f64> = probabilities.iter().map(|p| p.max(0.0)).collect();
        let norm: f64 = clipped.iter().sum();
        let mut acc = 0.0;
        let cumulative = clipped
            .iter()
            .map(|p| {
                acc += p / norm;
                acc
            })
            .collect();
        Ok(Self { cumulative })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            cumulative: (1..=n).map(|i| i as f64 / n as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // u < 1 always; guard against a last cumulative entry of 1 - ulp.
        idx.min(self.cumulative.len() - 1)
    }
}

/// Draws a measurement outcome with probability `Tr[E_i rho]`.
pub fn sample_povm<R: Rng + ?Sized>(rho: &DensityMatrix, povm: &Povm, rng: &mut R) -> Result<usize> {
    let probs = povm.probabilities(rho)?;
    Ok(DiscreteSampler::new(&probs)?.sample(rng))
}

/// Hilbert-Schmidt random density matrix: `G G^dag / Tr`, `G` complex Ginibre.
pub fn random_density_matrix<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    let g = DMatrix::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(Operator::new(m / tr, dims.to_vec())?.hermitian_part())
}

/// Haar-random `d x d` unitary via Gram-Schmidt on a complex Ginibre matrix
/// (the positive-diagonal QR factor makes the distribution exactly Haar).
pub fn random_local_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Operator> {
    if d < 2 {
        return Err(QpvError::InvalidArgument(format!("unitary dimension {d} < 2")));
    }
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();
    for k in 0..d {
        for j in 0..k {
            let (done, rest) = cols.split_at_mut(k);
            let qj = &done[j];
            let proj: C64 = qj.iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in rest[0].iter_mut().zip(qj) {
                *x -= proj * q;
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    let m = DMatrix::from_fn(d, d, |i, j| cols[j][i]);
    Operator::new(m, vec![d])
}
