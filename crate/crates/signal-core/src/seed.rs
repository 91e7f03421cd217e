/// Derives a child seed from a master seed and a tag path, so that every
/// generated signal, noise stream, and shuffle gets an independent,
/// reproducible stream. SplitMix64 finalization over the mixed words.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master ^ 0x9e37_79b9_7f4a_7c15;
    for &tag in tags {
        state = splitmix(state.wrapping_add(tag).wrapping_mul(0xbf58_476d_1ce4_e5b9));
    }
    splitmix(state)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
