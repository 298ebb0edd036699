//! Counter-style random streams: every draw site is keyed by
//! (seed, stream index, stage tag), so trials are order-independent and
//! results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_CODEBOOK: u64 = 0;
pub const TAG_STATE: u64 = 1;
pub const TAG_MESSAGE: u64 = 2;
pub const TAG_CHANNEL: u64 = 3;

pub fn stream_rng(seed: u64, stream: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&tag.to_le_bytes());
    key[24..].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
