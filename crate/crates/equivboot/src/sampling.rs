//! Deterministic splittable random streams and exact multinomial sampling.
//!
//! Every random quantity in this crate is drawn from an [`RngStream`]
//! identified by a root seed and a path of `(label, index)` pairs. Distinct
//! paths give independent streams, and a child stream depends only on its
//! parent's identity, never on how many values a sibling consumed. That
//! makes parallel execution bit-identical to sequential execution under any
//! scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::simplex::{CountVector, ProbVector};

/// A value-type handle on a deterministic random stream.
///
/// The stream identity is a 256-bit key obtained by hashing the root seed
/// and the derivation path; the generator itself is ChaCha8 keyed by it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: [u8; 32],
}

impl RngStream {
    /// Root stream for a 64-bit seed.
    pub fn from_seed(root_seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"equivboot/stream/v1");
        hasher.update(root_seed.to_le_bytes());
        Self {
            key: hasher.finalize().into(),
        }
    }

    /// Child stream for a `(label, index)` path step.
    ///
    /// Deriving the same step twice yields the same stream; distinct steps
    /// yield streams with unrelated keys.
    pub fn derive(&self, label: &str, index: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update(index.to_le_bytes());
        Self {
            key: hasher.finalize().into(),
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }

    /// A 64-bit seed identifying this stream, for echoing into reports and
    /// for re-rooting per-cell work.
    pub fn seed_u64(&self) -> u64 {
        u64::from_le_bytes(self.key[..8].try_into().expect("key has 32 bytes"))
    }
}

/// Draw one multinomial sample of `n` trials with class probabilities `p`.
///
/// Uses the conditional-binomial decomposition: class `i` receives a
/// binomial number of the remaining trials with success probability
/// `p_i / (p_i + ... + p_k)`. Cost is O(k) per draw independent of `n`,
/// counts always sum to `n`, and zero-probability classes receive zero
/// counts.
pub fn multinomial_sample<R: Rng + ?Sized>(n: u64, p: &ProbVector, rng: &mut R) -> CountVector {
    assert!(n >= 1, "multinomial sample needs at least one trial");
    let k = p.dim();
    let entries = p.entries();

    // Backward suffix sums make the last positive class's conditional
    // probability exactly 1.0, so no trial can leak into trailing
    // zero-probability classes.
    let mut suffix = vec![0.0f64; k + 1];
    for i in (0..k).rev() {
        suffix[i] = entries[i] + suffix[i + 1];
    }

    let mut counts = vec![0u64; k];
    let mut remaining = n;
    for i in 0..k {
        if remaining == 0 {
            break;
        }
        let pi = entries[i];
        if pi <= 0.0 {
            continue;
        }
        let cond = pi / suffix[i];
        let c = if cond >= 1.0 {
            remaining
        } else {
            rng.sample(
                rand_distr::Binomial::new(remaining, cond)
                    .expect("conditional probability lies in (0, 1)"),
            )
        };
        counts[i] = c;
        remaining -= c;
    }
    debug_assert_eq!(remaining, 0, "all trials must be assigned");
    CountVector::new(counts).expect("counts sum to n >= 1")
}

/// Convenience wrapper drawing from a stream-derived generator.
pub fn multinomial_sample_on(n: u64, p: &ProbVector, stream: &RngStream) -> Result<CountVector> {
    let mut rng = stream.rng();
    Ok(multinomial_sample(n, p, &mut rng))
}
