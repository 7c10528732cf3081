//! Reproducible random streams.
//!
//! Every independent unit of work (one initial configuration, one resistor
//! realization) owns a stream addressed by `(master_seed, stream_index)`.
//! ChaCha supports 2^64 independent streams per key, so stream `c` is the
//! ChaCha8 keystream for `master_seed` with its stream counter set to `c`.
//! Results therefore do not depend on how the work is scheduled across
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}
