//! Shared key bits and the encoder's private randomness.
//!
//! Both are counter-mode ChaCha20 streams keyed by a 64-bit seed. The key
//! stream reads stream id 0 and the private stream reads id 1, so equal seeds
//! still give independent sequences. A stream can also be scripted from an
//! explicit bit string, which the exact enumerators use to walk every key
//! realization.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};

const KEY_STREAM_ID: u64 = 0;
const PRIVATE_STREAM_ID: u64 = 1;

/// Derive a sub-seed for an independent purpose (source draws, key, side
/// information) from one run seed.
pub fn derive_seed(seed: u64, domain: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
enum Source {
    Prg { rng: Box<ChaCha20Rng>, word: u64, left: u32 },
    Script { bits: Vec<bool>, pos: usize },
}

impl Source {
    fn prg(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Source::Prg { rng: Box::new(rng), word: 0, left: 0 }
    }

    fn next_bit(&mut self) -> bool {
        match self {
            Source::Prg { rng, word, left } => {
                if *left == 0 {
                    *word = rng.next_u64();
                    *left = 64;
                }
                *left -= 1;
                (*word >> *left) & 1 == 1
            }
            Source::Script { bits, pos } => {
                let b = *bits.get(*pos).unwrap_or_else(|| panic!("scripted stream exhausted after {pos} bits"));
                *pos += 1;
                b
            }
        }
    }

    fn take(&mut self, n: usize) -> Bits {
        (0..n).map(|_| self.next_bit()).collect()
    }
}

/// The shared key `U`, read sequentially. Every read is charged to the
/// current stage; [`KeyStream::end_stage`] closes the stage and records its
/// consumption `l(K_t)`.
#[derive(Clone, Debug)]
pub struct KeyStream {
    seed: u64,
    source: Source,
    consumed_bits: usize,
    current_stage: usize,
    per_stage: Vec<usize>,
}

impl KeyStream {
    pub fn seeded(seed: u64) -> Self {
        KeyStream::with_source(seed, Source::prg(seed, KEY_STREAM_ID))
    }

    /// Replays `bits` and panics if read past the end.
    pub fn scripted(bits: impl Into<Bits>) -> Self {
        KeyStream::with_source(0, Source::Script { bits: bits.into().into_inner(), pos: 0 })
    }

    /// An endless all-zero key, i.e. no encryption.
    pub fn zeros(len: usize) -> Self {
        KeyStream::scripted(Bits::zeros(len))
    }

    fn with_source(seed: u64, source: Source) -> Self {
        KeyStream { seed, source, consumed_bits: 0, current_stage: 0, per_stage: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_bits(&mut self, n: usize) -> Bits {
        self.consumed_bits += n;
        self.current_stage += n;
        self.source.take(n)
    }

    pub fn next_bit(&mut self) -> bool {
        self.next_bits(1)[0]
    }

    /// Close the current stage, recording its key consumption.
    pub fn end_stage(&mut self) -> usize {
        let used = self.current_stage;
        self.per_stage.push(used);
        self.current_stage = 0;
        used
    }

    pub fn consumed_bits(&self) -> usize {
        self.consumed_bits
    }

    pub fn per_stage_consumption(&self) -> &[usize] {
        &self.per_stage
    }

    pub fn stages(&self) -> usize {
        self.per_stage.len()
    }

    /// Mean key bits per stage over the first `n_stages` recorded stages.
    pub fn key_rate(&self, n_stages: usize) -> Result<f64> {
        if n_stages == 0 {
            return Err(Error::ZeroStages);
        }
        let recorded = n_stages.min(self.per_stage.len());
        let total: usize = self.per_stage[..recorded].iter().sum();
        Ok(total as f64 / n_stages as f64)
    }
}

/// Alice's private randomness `V`, never shared.
#[derive(Clone, Debug)]
pub struct PrivateRandomness {
    seed: u64,
    source: Source,
    consumed_bits: usize,
}

impl PrivateRandomness {
    pub fn seeded(seed: u64) -> Self {
        PrivateRandomness { seed, source: Source::prg(seed, PRIVATE_STREAM_ID), consumed_bits: 0 }
    }

    pub fn scripted(bits: impl Into<Bits>) -> Self {
        PrivateRandomness {
            seed: 0,
            source: Source::Script { bits: bits.into().into_inner(), pos: 0 },
            consumed_bits: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_bits(&mut self, n: usize) -> Bits {
        self.consumed_bits += n;
        self.source.take(n)
    }

    pub fn consumed_bits(&self) -> usize {
        self.consumed_bits
    }
}
