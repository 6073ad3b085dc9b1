//! Fixtures shared by the benchmarks.

use peanoseg::chain::PotentialChain;
use peanoseg::imaging::{synth_noise, synthetic, LabelImage, ObservedImage};

/// Chain of `len` sites over `alphabet` states with deterministic,
/// strictly positive potentials.
pub fn chain(alphabet: usize, len: usize) -> PotentialChain {
    let data = (0..(len - 1) * alphabet * alphabet)
        .map(|i| 0.2 + ((i * 2654435761) % 1000) as f64 / 1000.0)
        .collect();
    PotentialChain::new(alphabet, len, data).expect("valid potentials")
}

/// Stripes-and-blocks truth of side `2^order` with `N(0,1)`/`N(1,1)` noise.
pub fn noisy_stripes(order: u32, seed: u64) -> (LabelImage, ObservedImage) {
    let truth = synthetic::stripes_and_blocks(order).expect("supported order");
    let obs = synth_noise(&truth, &[0.0, 1.0], &[1.0, 1.0], seed).expect("two classes");
    (truth, obs)
}
