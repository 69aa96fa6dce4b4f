//! Deterministic randomness.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! [`Seed`] and a stream number, so results depend only on the seed and the
//! role of the draw, never on thread scheduling. Nested roles (trial `t`,
//! then sample `j` inside it) use [`Seed::derive`].

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    /// A child seed for sub-task `index`; distinct indices give unrelated seeds.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(index.wrapping_add(0x5EED))))
    }

    /// Generator for `stream` under this seed.
    pub fn rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

/// Uniform integer in `[0, bound)` by rejection on the bit length of `bound`.
pub fn uniform_below_big<R: RngCore>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(bound.bits() > 0, "empty range");
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let top_mask: u32 = if top_bits == 32 { u32::MAX } else { (1u32 << top_bits) - 1 };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        *digits.last_mut().unwrap() &= top_mask;
        let v = BigUint::from_slice(&digits);
        if &v < bound {
            return v;
        }
    }
}

/// `count` distinct values drawn uniformly without replacement from
/// `lo..=hi`, in draw order.
pub fn distinct_draws<R: Rng>(rng: &mut R, lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let span = hi - lo + 1;
    assert!(count as u64 <= span, "cannot draw {count} distinct values from {span}");
    // sparse Fisher-Yates: only swapped positions are stored
    let mut swapped: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let j = rng.random_range(i..span);
        let vj = *swapped.get(&j).unwrap_or(&j);
        let vi = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, vi);
        out.push(lo + vj);
    }
    out
}
