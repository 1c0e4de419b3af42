//! Perfectly secret zero-delay coding when the eavesdropper can parse stages.
//!
//! Every stage emits a block of constant length `block_len` (the longest
//! codeword). The codeword of the current symbol is XORed with fresh key bits
//! and the rest of the block is filled with private random bits, so the block
//! is uniform whatever the symbol. Key consumption per stage is the codeword
//! length, hence the key rate is the code's expected length.

use serde::Serialize;

use crate::adversary::StagewiseEncoder;
use crate::bits::Bits;
use crate::codes::{build_huffman, ceil_log2, enumerate_complete_profiles, expected_length, InstantaneousCode, LengthProfile};
use crate::error::{Error, Result};
use crate::hull::{Envelope, EnvelopeValue};
use crate::keystream::{derive_seed, KeyStream, PrivateRandomness};
use crate::source_models::{bayes_posterior, sample, total_variation, Distribution, SourceModel};

/// Fill for the unused tail of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Fresh private random bits.
    Random,
    /// Zeros. Leaks the codeword length; kept only as a negative control.
    Zeros,
}

/// One encoder output `Z_t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    bits: Bits,
}

impl Block {
    pub fn new(bits: Bits) -> Self {
        Block { bits }
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn value(&self) -> u64 {
        self.bits.to_uint()
    }
}

#[derive(Debug, Clone)]
pub struct BlockScheme {
    code: InstantaneousCode,
    block_len: usize,
    padding: Padding,
}

impl BlockScheme {
    /// Block length is the code's longest codeword.
    pub fn new(code: InstantaneousCode) -> Self {
        let block_len = code.max_len();
        BlockScheme { code, block_len, padding: Padding::Random }
    }

    pub fn huffman(model: &SourceModel) -> Self {
        Self::new(build_huffman(model))
    }

    pub fn from_profile(profile: &LengthProfile, model: &SourceModel) -> Result<Self> {
        Ok(Self::new(profile.realize(model)?))
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn code(&self) -> &InstantaneousCode {
        &self.code
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }

    /// Encode one stage and close it on the key stream.
    pub fn encode_block(&self, x: usize, key: &mut KeyStream, private: &mut PrivateRandomness) -> Result<Block> {
        let block = self.encode_raw(x, key, private)?;
        key.end_stage();
        Ok(block)
    }

    fn encode_raw(&self, x: usize, key: &mut KeyStream, private: &mut PrivateRandomness) -> Result<Block> {
        if x >= self.code.alphabet_size() {
            return Err(Error::SymbolOutOfRange { symbol: x, size: self.code.alphabet_size() });
        }
        let word = self.code.codeword(x);
        let mut bits = word.xor(&key.next_bits(word.len()));
        let pad_len = self.block_len - word.len();
        match self.padding {
            Padding::Random => bits.extend_from(&private.next_bits(pad_len)),
            Padding::Zeros => bits.extend_from(&Bits::zeros(pad_len)),
        }
        Ok(Block::new(bits))
    }

    /// XOR key bits onto the block one at a time until a codeword appears;
    /// the remaining bits are padding and are ignored.
    pub fn decode_block(&self, block: &Block, key: &mut KeyStream) -> Result<usize> {
        let stage = key.stages();
        let mut plain = Bits::new();
        for &b in block.bits().iter() {
            plain.push(b ^ key.next_bit());
            if let Ok((symbol, used)) = self.code.parse_prefix(&plain) {
                debug_assert_eq!(used, plain.len());
                key.end_stage();
                return Ok(symbol);
            }
        }
        Err(Error::Desync { stage })
    }

    /// Exact law of the emitted block, over symbols, key bits and padding.
    pub fn block_distribution(&self, model: &SourceModel) -> Result<Distribution> {
        let joint = self.joint_symbol_block(model)?;
        let width = 1usize << self.block_len;
        let marginal: Vec<f64> = (0..width).map(|b| joint.iter().map(|row| row[b]).sum()).collect();
        let support = (0..width as u64).filter(|&b| marginal[b as usize] > 0.0).collect::<Vec<_>>();
        let probs = support.iter().map(|&b| marginal[b as usize]).collect();
        Distribution::new(support, probs)
    }

    /// `joint[x][block value]` over one stage, by enumerating key and pad bits.
    pub fn joint_symbol_block(&self, model: &SourceModel) -> Result<Vec<Vec<f64>>> {
        if model.alphabet_size() != self.code.alphabet_size() {
            return Err(Error::AlphabetMismatch { expected: self.code.alphabet_size(), actual: model.alphabet_size() });
        }
        if self.block_len > 20 {
            return Err(Error::StateSpaceTooLarge { required: 1u128 << self.block_len, limit: 1 << 20 });
        }
        let width = 1usize << self.block_len;
        let mut joint = vec![vec![0.0; width]; model.alphabet_size()];
        for (x, row) in joint.iter_mut().enumerate() {
            let l = self.code.len_of(x);
            let pad_len = self.block_len - l;
            let pads: u64 = match self.padding {
                Padding::Random => 1 << pad_len,
                Padding::Zeros => 1,
            };
            let weight = model.prob(x) / ((1u64 << l) as f64 * pads as f64);
            for k in 0..1u64 << l {
                let head = self.code.codeword(x).xor(&Bits::from_uint(k, l));
                for v in 0..pads {
                    let mut b = head.clone();
                    b.extend_from(&Bits::from_uint(v, pad_len));
                    row[b.to_uint() as usize] += weight;
                }
            }
        }
        Ok(joint)
    }
}

impl BlockScheme {
    /// Eve's posterior on the symbol of one stage given its block, summarized
    /// as `(expected TV to the prior, largest TV over observable blocks)`.
    pub fn posterior_tv(&self, model: &SourceModel) -> Result<(f64, f64)> {
        let joint = self.joint_symbol_block(model)?;
        let (mut expected, mut max_tv) = (0.0, 0.0f64);
        for b in 0..joint[0].len() {
            let pb: f64 = joint.iter().map(|row| row[b]).sum();
            if pb <= 0.0 {
                continue;
            }
            let lik: Vec<f64> = joint
                .iter()
                .enumerate()
                .map(|(x, row)| if model.prob(x) > 0.0 { row[b] / model.prob(x) } else { 0.0 })
                .collect();
            let post = bayes_posterior(model.pmf(), &lik).expect("block has positive probability");
            let tv = total_variation(&post, model.pmf());
            expected += pb * tv;
            max_tv = max_tv.max(tv);
        }
        Ok((expected, max_tv))
    }
}

impl StagewiseEncoder for BlockScheme {
    fn alphabet_size(&self) -> usize {
        self.code.alphabet_size()
    }

    fn max_key_bits(&self) -> usize {
        self.code.max_len()
    }

    fn max_private_bits(&self) -> usize {
        match self.padding {
            Padding::Random => self.block_len - self.code.min_len(),
            Padding::Zeros => 0,
        }
    }

    fn encode_stage(
        &self,
        symbols: &[usize],
        _past_keys: &[Bits],
        key: &mut KeyStream,
        private: &mut PrivateRandomness,
    ) -> Bits {
        let x = *symbols.last().expect("current symbol");
        self.encode_raw(x, key, private).expect("symbol in range").bits
    }
}

/// Summary of a simulated block-scheme run.
#[derive(Debug, Clone, Serialize)]
pub struct BlockTrace {
    pub n: usize,
    pub seed: u64,
    pub block_len: usize,
    pub key_bits: usize,
    pub coded_bits: usize,
    pub key_rate: f64,
    pub coding_rate: f64,
    pub expected_key_rate: f64,
    pub round_trip_ok: bool,
    pub private_bits: usize,
}

/// Encode and decode `n` i.i.d. symbols with independent key replicas at
/// Alice and Bob.
pub fn simulate_block(scheme: &BlockScheme, model: &SourceModel, n: usize, seed: u64) -> Result<BlockTrace> {
    let xs = sample(model, n, derive_seed(seed, 1));
    let key_seed = derive_seed(seed, 2);
    let mut alice_key = KeyStream::seeded(key_seed);
    let mut bob_key = KeyStream::seeded(key_seed);
    let mut private = PrivateRandomness::seeded(derive_seed(seed, 3));
    let mut coded_bits = 0;
    let mut ok = true;
    for &x in &xs {
        let block = scheme.encode_block(x, &mut alice_key, &mut private)?;
        coded_bits += block.len();
        ok &= scheme.decode_block(&block, &mut bob_key)? == x;
    }
    ok &= alice_key.consumed_bits() == bob_key.consumed_bits();
    let stages = n.max(1);
    Ok(BlockTrace {
        n,
        seed,
        block_len: scheme.block_len(),
        key_bits: alice_key.consumed_bits(),
        coded_bits,
        key_rate: alice_key.consumed_bits() as f64 / stages as f64,
        coding_rate: coded_bits as f64 / stages as f64,
        expected_key_rate: expected_length(scheme.code(), model)?,
        round_trip_ok: ok,
        private_bits: private.consumed_bits(),
    })
}

/// One operating point: block length `rate` and expected key use `key_rate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPoint {
    pub profile: LengthProfile,
    pub rate: f64,
    pub key_rate: f64,
}

/// All complete-profile operating points plus their lower convex envelope.
#[derive(Debug, Clone)]
pub struct Region {
    model: SourceModel,
    points: Vec<RegionPoint>,
    envelope: Envelope,
}

/// One point per complete length profile of the alphabet.
pub fn region_points(model: &SourceModel) -> Result<Region> {
    if model.alphabet_size() < 2 {
        return Err(Error::InvalidDistribution("region needs at least two symbols".into()));
    }
    let mut points = Vec::new();
    for profile in enumerate_complete_profiles(model.alphabet_size()) {
        let lengths = profile.assign(model)?;
        let key_rate = lengths.iter().enumerate().map(|(x, &l)| model.prob(x) * l as f64).sum();
        points.push(RegionPoint { rate: profile.max_len() as f64, key_rate, profile });
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.rate, p.key_rate)).collect();
    let envelope = Envelope::from_points(&xy);
    Ok(Region { model: model.clone(), points, envelope })
}

impl Region {
    pub fn points(&self) -> &[RegionPoint] {
        &self.points
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn on_envelope(&self, index: usize) -> bool {
        let p = &self.points[index];
        self.envelope.touches(p.rate, p.key_rate)
    }

    /// Minimum key rate achievable at block rate `rate` by time-sharing.
    pub fn key_rate_at(&self, rate: f64) -> EnvelopeValue {
        self.envelope.eval(rate)
    }

    /// Deterministic time-sharing scheme operating on the envelope at `rate`.
    pub fn achieve(&self, rate: f64) -> Result<TimeSharedBlockScheme> {
        let mix = self.envelope.mix_at(rate).ok_or_else(|| {
            Error::Infeasible(format!("block rate {rate} below ceil(log2 |X|) = {}", ceil_log2(self.model.alphabet_size())))
        })?;
        let first = BlockScheme::from_profile(&self.points[mix.left.source].profile, &self.model)?;
        let second = BlockScheme::from_profile(&self.points[mix.right.source].profile, &self.model)?;
        Ok(TimeSharedBlockScheme { first, second, schedule: TimeShareSchedule::new(mix.weight_left) })
    }
}

/// Deterministic fractional schedule: over any `n` leading stages, exactly
/// `floor(n * fraction)` use the first scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeShareSchedule {
    fraction: f64,
}

impl TimeShareSchedule {
    pub fn new(fraction: f64) -> Self {
        TimeShareSchedule { fraction: fraction.clamp(0.0, 1.0) }
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn uses_first(&self, stage: usize) -> bool {
        let f = self.fraction;
        ((stage + 1) as f64 * f).floor() > (stage as f64 * f).floor()
    }
}

/// Two block schemes alternated on a fixed schedule known to both ends.
#[derive(Debug, Clone)]
pub struct TimeSharedBlockScheme {
    pub first: BlockScheme,
    pub second: BlockScheme,
    pub schedule: TimeShareSchedule,
}

impl TimeSharedBlockScheme {
    fn at(&self, stage: usize) -> &BlockScheme {
        if self.schedule.uses_first(stage) {
            &self.first
        } else {
            &self.second
        }
    }

    pub fn encode_block(&self, stage: usize, x: usize, key: &mut KeyStream, private: &mut PrivateRandomness) -> Result<Block> {
        self.at(stage).encode_block(x, key, private)
    }

    pub fn decode_block(&self, stage: usize, block: &Block, key: &mut KeyStream) -> Result<usize> {
        self.at(stage).decode_block(block, key)
    }
}
