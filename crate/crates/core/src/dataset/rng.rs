//! SplitMix64 and a Fisher-Yates shuffle on top of it.
//!
//! The exact sequence is part of the split file contract: given the same
//! seed and the same sorted pool, every implementation must produce the
//! same permutation.
//!
//! * state update: `state += 0x9E3779B97F4A7C15`, then the standard
//!   SplitMix64 finalizer on the new state.
//! * bounded draw in `[0, n)`: reject raw outputs below `2^64 mod n`,
//!   otherwise return `raw mod n`.
//! * shuffle: for `i` from `len - 1` down to `1`, swap `i` with a draw in
//!   `[0, i + 1)`.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Unbiased draw in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
