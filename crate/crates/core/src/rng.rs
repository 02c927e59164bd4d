//! Counter-based random streams and discrete sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent generator for `(master seed, stream id)`. Work item `k` of a
/// parallel loop uses stream `k`, so results do not depend on scheduling.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Derives a sub-seed for a named stage so that stages do not share streams.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3)));
    rng.gen()
}

/// Inverse-CDF sampler over indices `0..len`.
#[derive(Clone, Debug)]
pub struct CdfSampler {
    cdf: Vec<f64>,
}

impl CdfSampler {
    /// Builds from nonnegative weights; they need not be normalized.
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .into_iter()
            .map(|w| {
                acc += w.max(0.0);
                acc
            })
            .collect();
        Self { cdf }
    }

    pub fn total(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>() * self.total();
        let idx = self.cdf.partition_point(|&c| c <= u);
        // Rounding can land past the end or on a zero-weight tail.
        let idx = idx.min(self.cdf.len() - 1);
        if idx > 0 && self.cdf[idx] == self.cdf[idx - 1] {
            self.cdf[..idx].partition_point(|&c| c < self.cdf[idx])
        } else {
            idx
        }
    }
}
