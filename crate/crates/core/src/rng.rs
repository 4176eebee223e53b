//! Counter-based random streams: one ChaCha stream per `(seed, operation, index)`,
//! so results never depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Operation identifiers keep streams of different consumers apart.
pub mod op {
    pub const RESTART: u64 = 1;
    pub const WALK: u64 = 2;
    pub const MC_HEAT: u64 = 3;
    pub const EXIT: u64 = 4;
    pub const COUPLED: u64 = 5;
    pub const FIELD: u64 = 6;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The stream for sample `index` of operation `op` under `seed`.
pub fn stream(seed: u64, op: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = splitmix(seed ^ splitmix(op));
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&s.to_le_bytes());
        s = splitmix(s);
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
