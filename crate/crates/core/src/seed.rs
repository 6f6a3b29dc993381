//! Stable seed derivation for independent random streams.
//!
//! The mix is SplitMix64's finaliser applied after absorbing each input in a
//! fixed order: `base`, the FNV-1a hash of `tag`, `n`, then `sample`. Every
//! absorption step is a bijection of the running state, so for fixed
//! `(base, tag, n)` distinct `sample` values never collide. The constants
//! are part of the output contract and must not change.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed for the random stream of cell `(n, sample)` in experiment `tag`.
pub fn derive_seed(base: u64, n: u64, sample: u64, tag: &str) -> u64 {
    let mut h = mix64(base.wrapping_add(GOLDEN_GAMMA));
    h = mix64(h ^ fnv1a(tag.as_bytes()));
    h = mix64(h.wrapping_add(GOLDEN_GAMMA) ^ n);
    mix64(h.wrapping_add(GOLDEN_GAMMA) ^ sample)
}
