//! Per-cell random streams.
//!
//! Every grid cell draws from its own ChaCha8 stream: the key is a SHA-256
//! digest of the master seed and the scenario identifier, the stream number is
//! the cell index. Cells can therefore run in any order, on any number of
//! threads, and still see exactly the same variates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type CellRng = ChaCha8Rng;

/// Key material shared by all cells of one scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey([u8; 32]);

impl StreamKey {
    pub fn new(master_seed: u64, scenario_id: &str) -> Self {
        let mut h = Sha256::new();
        h.update(master_seed.to_le_bytes());
        h.update(scenario_id.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        StreamKey(key)
    }

    pub fn cell(&self, index: u64) -> CellRng {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(index);
        rng
    }
}
