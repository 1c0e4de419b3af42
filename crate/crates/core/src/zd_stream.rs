//! Zero-delay coding when the eavesdropper sees only the unparsed stream.
//!
//! Each symbol's Huffman codeword is XORed with fresh key bits and appended
//! to a single bit-stream. Coding rate and key rate both equal the expected
//! codeword length; only the total stream length carries information.

use serde::Serialize;

use crate::bits::Bits;
use crate::codes::{expected_length, InstantaneousCode};
use crate::error::{Error, Result};
use crate::keystream::{derive_seed, KeyStream};
use crate::source_models::{sample, SourceModel};

/// `B_n` with its stage boundaries. Boundaries stay private to the crate;
/// an eavesdropper gets an [`AdversaryView`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BitStream {
    bits: Bits,
    stage_offsets: Vec<usize>,
}

impl BitStream {
    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    /// `l(B_n)`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn stages(&self) -> usize {
        self.stage_offsets.len()
    }

    #[cfg(test)]
    pub(crate) fn stage_offsets(&self) -> &[usize] {
        &self.stage_offsets
    }

    /// What a tap on the link sees: the flat bits and nothing else.
    pub fn adversary_view(&self) -> AdversaryView {
        AdversaryView { bits: self.bits.clone() }
    }

    /// Drop trailing bits, e.g. to model a truncated transmission.
    pub fn truncate(&mut self, len: usize) {
        self.bits.truncate(len);
        self.stage_offsets.retain(|&o| o <= len);
    }
}

/// The eavesdropper's observation of the stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryView {
    bits: Bits,
}

impl AdversaryView {
    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// ASCII `0`/`1`, one character per bit, no framing. Byte packing would
    /// hide the exact stream length, which is the very quantity under audit.
    pub fn to_ascii(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| if b { b'1' } else { b'0' }).collect()
    }
}

/// Appends stages as symbols arrive; `n` need not be known in advance.
#[derive(Debug, Clone)]
pub struct StreamEncoder<'a> {
    code: &'a InstantaneousCode,
    stream: BitStream,
}

impl<'a> StreamEncoder<'a> {
    pub fn new(code: &'a InstantaneousCode) -> Self {
        StreamEncoder { code, stream: BitStream::default() }
    }

    pub fn push(&mut self, x: usize, key: &mut KeyStream) -> Result<()> {
        if x >= self.code.alphabet_size() {
            return Err(Error::SymbolOutOfRange { symbol: x, size: self.code.alphabet_size() });
        }
        let word = self.code.codeword(x);
        let enc = word.xor(&key.next_bits(word.len()));
        key.end_stage();
        self.stream.bits.extend_from(&enc);
        self.stream.stage_offsets.push(self.stream.bits.len());
        Ok(())
    }

    pub fn stream(&self) -> &BitStream {
        &self.stream
    }

    pub fn finish(self) -> BitStream {
        self.stream
    }
}

pub fn encode_stream(code: &InstantaneousCode, xs: &[usize], key: &mut KeyStream) -> Result<BitStream> {
    let mut enc = StreamEncoder::new(code);
    for &x in xs {
        enc.push(x, key)?;
    }
    Ok(enc.finish())
}

/// Bob's sequential decoder: decrypt bit by bit until a codeword completes.
pub fn decode_stream(code: &InstantaneousCode, bits: &[bool], key: &mut KeyStream, n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(n);
    let mut pos = 0;
    for stage in 0..n {
        let mut plain = Bits::new();
        loop {
            let Some(&b) = bits.get(pos) else {
                return Err(Error::Desync { stage });
            };
            pos += 1;
            plain.push(b ^ key.next_bit());
            if let Ok((symbol, _)) = code.parse_prefix(&plain) {
                out.push(symbol);
                key.end_stage();
                break;
            }
            if plain.len() >= code.max_len() {
                return Err(Error::Desync { stage });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamTrace {
    pub n: usize,
    pub seed: u64,
    pub coded_bits: usize,
    pub key_bits: usize,
    pub coding_rate: f64,
    pub key_rate: f64,
    pub expected_rate: f64,
    pub round_trip_ok: bool,
}

/// Encode `n` i.i.d. symbols and decode them with a key replica.
pub fn simulate_stream(code: &InstantaneousCode, model: &SourceModel, n: usize, seed: u64) -> Result<(StreamTrace, BitStream)> {
    let xs = sample(model, n, derive_seed(seed, 1));
    let key_seed = derive_seed(seed, 2);
    let mut alice = KeyStream::seeded(key_seed);
    let stream = encode_stream(code, &xs, &mut alice)?;
    let mut bob = KeyStream::seeded(key_seed);
    let decoded = decode_stream(code, stream.bits(), &mut bob, n)?;
    let stages = n.max(1) as f64;
    let trace = StreamTrace {
        n,
        seed,
        coded_bits: stream.len(),
        key_bits: alice.consumed_bits(),
        coding_rate: stream.len() as f64 / stages,
        key_rate: alice.consumed_bits() as f64 / stages,
        expected_rate: expected_length(code, model)?,
        round_trip_ok: decoded == xs,
    };
    Ok((trace, stream))
}
