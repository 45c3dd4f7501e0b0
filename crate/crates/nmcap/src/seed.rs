/// SplitMix64 finalizer over `seed ⊕ stream·φ`. Used to derive independent
/// seeds for sweep points and noise generators.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream tag for the channel noise generator of a run.
pub(crate) const NOISE_STREAM: u64 = 0x006e_6f69_7365;
