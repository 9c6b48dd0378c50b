use crate::lang::HoleAddr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Derivation key of a choice stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub program: u64,
    pub addr: HoleAddr,
}

/// Deterministic source of hole choices. Equal keys yield equal draw
/// sequences; the key is laid out directly as the ChaCha seed, so distinct
/// keys never share a stream.
#[derive(Clone, Debug)]
pub struct ChoiceStream(ChaCha8Rng);

const DOMAIN: u64 = 0x7465_6d70_6c61_7231;

impl ChoiceStream {
    pub fn new(key: StreamKey) -> ChoiceStream {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&key.seed.to_le_bytes());
        seed[8..16].copy_from_slice(&key.program.to_le_bytes());
        seed[16..24].copy_from_slice(&u64::from(key.addr.0).to_le_bytes());
        seed[24..32].copy_from_slice(&DOMAIN.to_le_bytes());
        ChoiceStream(ChaCha8Rng::from_seed(seed))
    }

    /// Uniform draw from `0..n`; `n` must be nonzero.
    pub fn index(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    /// Uniform draw from the closed range `[min, max]`.
    pub fn int_in(&mut self, min: i64, max: i64) -> i64 {
        self.0.gen_range(min..=max)
    }
}
