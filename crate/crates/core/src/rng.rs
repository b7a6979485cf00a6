//! Deterministic per-trial random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha stream keyed by
//! `(seed, purpose, trial)`, so results do not depend on how trials are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Bits = 1,
    Noise = 2,
    SolverInit = 3,
    Randomization = 4,
}

pub type TrialRng = ChaCha8Rng;

/// Stream for `trial` under `purpose`, derived from the master `seed`.
pub fn substream(seed: u64, purpose: Purpose, trial: u64) -> TrialRng {
    let key = splitmix64(seed ^ splitmix64(purpose as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
