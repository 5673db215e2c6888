//! Counter-based RNG streams.
//!
//! All generator randomness is keyed by `(seed, domain, a, b)` rather than
//! drawn from a per-rank stream, so regenerating a graph under a different
//! PE count yields bit-identical edges and weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Weight;

pub const DOMAIN_PAIR: u64 = 1;
pub const DOMAIN_WEIGHT: u64 = 2;
pub const DOMAIN_POINT: u64 = 3;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn mix(seed: u64, domain: u64, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(seed ^ 0xA076_1D64_78BD_642F);
    h = splitmix64(h ^ domain);
    h = splitmix64(h ^ a);
    splitmix64(h ^ b)
}

/// Fresh stream for one keyed event.
pub fn keyed_rng(seed: u64, domain: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, domain, a, b))
}

/// Weight of the undirected edge `{lo, hi}`, uniform in `[wmin, wmax)`;
/// both directions share it by construction.
pub fn weight_for_pair(seed: u64, lo: u64, hi: u64, wmin: Weight, wmax: Weight) -> Weight {
    debug_assert!(lo < hi && wmin >= 1 && wmax > wmin);
    keyed_rng(seed, DOMAIN_WEIGHT, lo, hi).gen_range(wmin..wmax)
}
