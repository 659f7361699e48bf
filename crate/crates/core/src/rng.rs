//! Seeded, counter-based random streams.
//!
//! Every realization of an ensemble draws from its own ChaCha stream keyed by
//! `(seed, stream)`, so results do not depend on how realizations are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// Stream for realization `index` of an ensemble started at `self`.
    pub fn realization(self, index: usize) -> Self {
        Self { stream: self.stream.wrapping_add(index as u64), ..self }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
