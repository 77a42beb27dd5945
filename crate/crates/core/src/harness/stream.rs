//! Per-trial random streams.
//!
//! A trial's stream is a ChaCha8 generator whose 256-bit key is expanded from
//! the master seed with SplitMix64 (four consecutive outputs, little-endian)
//! and whose stream id is the trial index. Each trial thus reads its own
//! region of one counter-based keystream, so results do not depend on which
//! worker runs which trial. This derivation is part of the reproducibility
//! contract and must not change between releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_stream(master_seed: u64, trial_index: u64) -> Stream {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial_index);
    rng
}
