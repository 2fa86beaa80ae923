//! Seed derivation and random streams.
//!
//! Every random quantity in a run traces back to one 64-bit run seed. The run
//! seed is split into independent ChaCha streams by purpose, so changing how
//! many draws one purpose consumes never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers for the per-run random streams.
pub mod stream {
    pub const INITIAL_POSITIONS: u64 = 1;
    pub const DYNAMICS: u64 = 2;
    pub const BOOTSTRAP: u64 = 3;
}

/// Salts for deriving child seeds from a run seed.
pub mod salt {
    pub const BELIEFS: u64 = 0x6265_6c69_6566_7321;
    pub const TRUTH: u64 = 0x7472_7574_6800_0000;
    pub const DIVERGENCE: u64 = 0x6469_7665_7267_0000;
    pub const BOOTSTRAP: u64 = 0x626f_6f74_7374_7270;
}

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for run `run_index` of condition `condition_index`.
///
/// The two indices are packed into one word (`condition << 32 | run`), xored
/// with the mixed master seed and mixed again. Both steps are bijections, so
/// for a fixed master seed distinct index pairs always give distinct seeds.
pub fn derive_run_seed(master_seed: u64, condition_index: u32, run_index: u32) -> u64 {
    let packed = (u64::from(condition_index) << 32) | u64::from(run_index);
    mix64(mix64(master_seed) ^ packed)
}

/// Child seed for a labelled purpose (`salt`) and position (`index`).
pub fn split_seed(seed: u64, salt: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ salt).wrapping_add(index))
}

/// A ChaCha8 generator on a numbered stream of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
