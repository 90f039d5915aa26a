//! Deterministic random streams.
//!
//! A stream is named by `(seed, label)`; the pair is hashed into a ChaCha8
//! key, so equal pairs give equal sequences on every platform. Per-index
//! substreams use ChaCha's stream counter, which lets parallel workers draw
//! path `i` without coordinating with each other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub label: String,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        RngStream {
            seed,
            label: label.into(),
        }
    }

    /// A stream whose label extends this one's (`parent/child`).
    pub fn child(&self, label: impl AsRef<str>) -> Self {
        RngStream {
            seed: self.seed,
            label: format!("{}/{}", self.label, label.as_ref()),
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(self.label.as_bytes());
        h.finalize().into()
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }

    /// Independent counter-based substream `index` of this stream.
    pub fn substream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(index);
        rng
    }

    /// 64-bit value derived from the stream identity, for seeding children
    /// by number rather than by label.
    pub fn derive_seed(&self) -> u64 {
        let k = self.key();
        u64::from_le_bytes(k[..8].try_into().expect("8 bytes"))
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
