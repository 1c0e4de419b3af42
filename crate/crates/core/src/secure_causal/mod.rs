//! Separation schemes for secure causal coding: a time-shared scalar
//! quantizer, a lossless stage (Huffman over m-tuples, or Slepian-Wolf
//! binning when the decoder holds side information), and a one-time pad over
//! a prefix of the coded bits.

mod slepian_wolf;

pub use slepian_wolf::{posteriors_from_joint, slepian_wolf_binning, slepian_wolf_binning_with, OsdConfig, SwCode, SwOutcome};

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::SecrecySystem;
use crate::bits::Bits;
use crate::causal_rd::{rc_curve, rc_si_curve, DistortionMatrix, Quantizer, SIQuantizerPair, TimeShare};
use crate::codes::{build_huffman, ceil_log2, InstantaneousCode};
use crate::error::{Error, Result};
use crate::keystream::{derive_seed, KeyStream};
use crate::source_models::{conditional_entropy, sample, sample_channel, JointSourceModel, SourceModel};

/// Target distortion and equivocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Target {
    pub d: f64,
    pub h: f64,
}

/// Block lengths and code parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignParams {
    /// Source block length.
    pub n: usize,
    /// Tuple length of the Huffman stage.
    pub m: usize,
    /// Symbols per Slepian-Wolf block.
    pub sw_block_len: usize,
    /// Bits/symbol added to the conditional entropy of each Slepian-Wolf block,
    /// charged only where that entropy is positive.
    pub sw_margin: f64,
    /// Seed of the (public) binning matrices.
    pub sw_seed: u64,
    pub osd: OsdConfig,
}

impl Default for DesignParams {
    fn default() -> Self {
        DesignParams { n: 10_000, m: 8, sw_block_len: 200, sw_margin: 0.25, sw_seed: 0, osd: OsdConfig::default() }
    }
}

/// Huffman code over the support of one m-tuple distribution. A tuple law
/// with a single outcome needs no bits at all.
#[derive(Debug, Clone)]
struct TupleCoder {
    sizes: Vec<usize>,
    support: Vec<usize>,
    index: HashMap<usize, usize>,
    code: Option<InstantaneousCode>,
}

impl TupleCoder {
    fn new(marginals: &[Vec<f64>], limit: u128) -> Result<Self> {
        let sizes: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let total = sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
        if total > limit {
            return Err(Error::StateSpaceTooLarge { required: total, limit });
        }
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for id in 0..total as usize {
            let p: f64 = Self::split(&sizes, id).iter().zip(marginals).map(|(&s, m)| m[s]).product();
            if p > 0.0 {
                support.push(id);
                probs.push(p);
            }
        }
        let code = if support.len() > 1 {
            Some(build_huffman(&SourceModel::new(probs)?))
        } else {
            None
        };
        let index = support.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Ok(TupleCoder { sizes, support, index, code })
    }

    fn join(sizes: &[usize], tuple: &[usize]) -> usize {
        tuple.iter().zip(sizes).fold(0, |acc, (&s, &size)| acc * size + s)
    }

    fn split(sizes: &[usize], mut id: usize) -> Vec<usize> {
        let mut out = vec![0; sizes.len()];
        for (slot, &size) in out.iter_mut().zip(sizes).rev() {
            *slot = id % size;
            id /= size;
        }
        out
    }

    fn encode(&self, tuple: &[usize], out: &mut Bits) -> Result<()> {
        let id = Self::join(&self.sizes, tuple);
        let &i = self.index.get(&id).ok_or_else(|| Error::Config("tuple outside the coder support".into()))?;
        if let Some(code) = &self.code {
            out.extend_from(code.codeword(i));
        }
        Ok(())
    }

    /// Returns the tuple and the number of bits consumed.
    fn decode(&self, bits: &[bool]) -> Result<(Vec<usize>, usize)> {
        let (i, used) = match &self.code {
            Some(code) => code.parse_prefix(bits)?,
            None => (0, 0),
        };
        Ok((Self::split(&self.sizes, self.support[i]), used))
    }
}

#[derive(Debug, Clone)]
struct SwBlock {
    start: usize,
    len: usize,
    code: SwCode,
}

#[derive(Debug, Clone)]
enum Stage {
    Plain {
        first: Quantizer,
        second: Quantizer,
        /// Keyed by the number of first-quantizer positions in a tuple.
        coders: BTreeMap<usize, TupleCoder>,
    },
    SideInfo {
        first: SIQuantizerPair,
        second: SIQuantizerPair,
        /// `P(s, y)` under each quantizer.
        message_joint: [Vec<Vec<f64>>; 2],
        blocks: Vec<SwBlock>,
    },
}

/// A separation scheme designed for one block length `n`.
#[derive(Debug, Clone)]
pub struct SeparationScheme {
    params: DesignParams,
    target: Target,
    source_size: usize,
    lambda: f64,
    switch_at: usize,
    rate_bound: f64,
    entropy_bound: f64,
    key_fraction: f64,
    key_len: usize,
    distortion: DistortionMatrix,
    stage: Stage,
}

/// Encoder output: the transmitted bits and the quantizer messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub z: Bits,
    pub messages: Vec<usize>,
    pub key_bits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub messages: Vec<usize>,
    pub reproduction: Vec<usize>,
}

fn check_target(target: &Target, rate_bound: Option<f64>, min_d: f64, entropy_bound: f64, what: &str) -> Result<f64> {
    if !(target.d >= 0.0 && target.h >= 0.0) {
        return Err(Error::Config("targets must be non-negative".into()));
    }
    if target.h > entropy_bound + 1e-9 {
        return Err(Error::Infeasible(format!("h = {} exceeds {what} = {entropy_bound:.6}", target.h)));
    }
    rate_bound.ok_or_else(|| Error::Infeasible(format!("D = {} is below the least achievable distortion {min_d:.6}", target.d)))
}

fn check_params(p: &DesignParams, needs_tuples: bool) -> Result<()> {
    if p.n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    if needs_tuples && (p.m == 0 || p.n % p.m != 0) {
        return Err(Error::Config(format!("n = {} must be a positive multiple of m = {}", p.n, p.m)));
    }
    if !needs_tuples && p.sw_block_len == 0 {
        return Err(Error::Config("Slepian-Wolf block length must be positive".into()));
    }
    Ok(())
}

fn key_plan(target: &Target, entropy_bound: f64, rate_bound: f64, n: usize) -> (f64, usize) {
    let fraction = (target.h - entropy_bound + rate_bound).max(0.0);
    (fraction, (n as f64 * fraction - 1e-9).ceil().max(0.0) as usize)
}

const TUPLE_LIMIT: u128 = 1 << 20;

impl SeparationScheme {
    /// Scheme without side information for `(D, h)` on `model`.
    pub fn design_no_si(model: &SourceModel, d: &DistortionMatrix, target: Target, params: DesignParams) -> Result<Self> {
        check_params(&params, true)?;
        let curve = rc_curve(model, d)?;
        let entropy_bound = model.entropy();
        let rate_bound = check_target(&target, curve.envelope_at(target.d).feasible(), curve.min_distortion(), entropy_bound, "H(X)")?;
        let share = curve.time_share(target.d).expect("feasible distortion");
        let TimeShare { first, second, lambda } = share;
        let switch_at = (lambda * params.n as f64 + 1e-9).floor() as usize;
        let pmf = |q: &Quantizer| -> Vec<f64> {
            let mut p = vec![0.0; d.reproduction_size()];
            for (x, &s) in q.map().iter().enumerate() {
                p[s] += model.prob(x);
            }
            p
        };
        let (p1, p2) = (pmf(&first.witness), pmf(&second.witness));
        let mut coders = BTreeMap::new();
        for j in 0..params.n / params.m {
            let k = switch_at.saturating_sub(j * params.m).min(params.m);
            if let std::collections::btree_map::Entry::Vacant(e) = coders.entry(k) {
                let marginals: Vec<Vec<f64>> = (0..params.m).map(|i| if i < k { p1.clone() } else { p2.clone() }).collect();
                e.insert(TupleCoder::new(&marginals, TUPLE_LIMIT)?);
            }
        }
        let (key_fraction, key_len) = key_plan(&target, entropy_bound, rate_bound, params.n);
        Ok(SeparationScheme {
            params,
            target,
            source_size: model.alphabet_size(),
            lambda,
            switch_at,
            rate_bound,
            entropy_bound,
            key_fraction,
            key_len,
            distortion: d.clone(),
            stage: Stage::Plain { first: first.witness, second: second.witness, coders },
        })
    }

    /// Scheme with decoder side information `Y` against an eavesdropper
    /// holding `W`.
    pub fn design_si(joint: &JointSourceModel, d: &DistortionMatrix, target: Target, params: DesignParams) -> Result<Self> {
        check_params(&params, false)?;
        let curve = rc_si_curve(joint, d)?;
        let entropy_bound = joint.h_x_given_w();
        let rate_bound = check_target(&target, curve.envelope_at(target.d).feasible(), curve.min_distortion(), entropy_bound, "H(X|W)")?;
        let TimeShare { first, second, lambda } = curve.time_share(target.d).expect("feasible distortion");
        let n = params.n;
        let switch_at = (lambda * n as f64 + 1e-9).floor() as usize;
        let message_joint = [first.witness.message_joint(joint), second.witness.message_joint(joint)];
        let rates = [conditional_entropy(&message_joint[0]), conditional_entropy(&message_joint[1])];
        let sizes = [first.witness.message_size(), second.witness.message_size()];
        let width = ceil_log2(sizes[0].max(sizes[1]));
        let mut blocks = Vec::new();
        let mut start = 0;
        while start < n {
            let len = params.sw_block_len.min(n - start);
            let which = |t: usize| usize::from(t >= switch_at);
            // Positions whose message is determined by Y cost nothing, margin included.
            let need: f64 = (start..start + len).map(|t| rates[which(t)]).filter(|&r| r > 0.0).map(|r| r + params.sw_margin).sum();
            let full: f64 = (start..start + len).map(|t| (sizes[which(t)] as f64).log2()).sum();
            let seed = derive_seed(params.sw_seed, blocks.len() as u64);
            let code = if need >= full - 1e-9 && full > 0.0 {
                SwCode::identity(len, width, seed)
            } else {
                SwCode::new(len, width, (need - 1e-9).ceil().max(0.0) as usize, seed)
            };
            blocks.push(SwBlock { start, len, code });
            start += len;
        }
        let (key_fraction, key_len) = key_plan(&target, entropy_bound, rate_bound, n);
        Ok(SeparationScheme {
            params,
            target,
            source_size: joint.x_size(),
            lambda,
            switch_at,
            rate_bound,
            entropy_bound,
            key_fraction,
            key_len,
            distortion: d.clone(),
            stage: Stage::SideInfo { first: first.witness, second: second.witness, message_joint, blocks },
        })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn has_side_information(&self) -> bool {
        matches!(self.stage, Stage::SideInfo { .. })
    }

    /// Fraction of symbols handled by the first quantizer.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// First index handled by the second quantizer, `floor(lambda n)`.
    pub fn switch_index(&self) -> usize {
        self.switch_at
    }

    /// Envelope value of the (conditional) quantizer rate at the target.
    pub fn rate_bound(&self) -> f64 {
        self.rate_bound
    }

    /// `H(X)`, or `H(X|W)` with side information.
    pub fn entropy_bound(&self) -> f64 {
        self.entropy_bound
    }

    /// `max(0, h - H(X|W) + rate_bound)`.
    pub fn key_fraction(&self) -> f64 {
        self.key_fraction
    }

    /// Key bits reserved per block before clamping to the coded length.
    pub fn key_len(&self) -> usize {
        self.key_len
    }

    pub fn quantizer_strings(&self) -> (String, String) {
        match &self.stage {
            Stage::Plain { first, second, .. } => (first.to_string(), second.to_string()),
            Stage::SideInfo { first, second, .. } => (
                format!("{}/{}", first.f_string(), first.g_string()),
                format!("{}/{}", second.f_string(), second.g_string()),
            ),
        }
    }

    fn uses_first(&self, t: usize) -> bool {
        t < self.switch_at
    }

    /// `S_t` for every position.
    pub fn messages(&self, xs: &[usize]) -> Vec<usize> {
        xs.iter()
            .enumerate()
            .map(|(t, &x)| match &self.stage {
                Stage::Plain { first, second, .. } => {
                    if self.uses_first(t) {
                        first.apply(x)
                    } else {
                        second.apply(x)
                    }
                }
                Stage::SideInfo { first, second, .. } => {
                    if self.uses_first(t) {
                        first.encode(x)
                    } else {
                        second.encode(x)
                    }
                }
            })
            .collect()
    }

    fn tuple_pattern(&self, j: usize) -> usize {
        self.switch_at.saturating_sub(j * self.params.m).min(self.params.m)
    }

    pub fn encode_separation(&self, xs: &[usize], key: &mut KeyStream) -> Result<Encoded> {
        if xs.len() != self.params.n {
            return Err(Error::Config(format!("scheme expects {} symbols, got {}", self.params.n, xs.len())));
        }
        if let Some(&x) = xs.iter().find(|&&x| x >= self.source_size) {
            return Err(Error::SymbolOutOfRange { symbol: x, size: self.source_size });
        }
        let messages = self.messages(xs);
        let mut z = Bits::new();
        match &self.stage {
            Stage::Plain { coders, .. } => {
                for (j, tuple) in messages.chunks(self.params.m).enumerate() {
                    coders[&self.tuple_pattern(j)].encode(tuple, &mut z)?;
                }
            }
            Stage::SideInfo { blocks, .. } => {
                for b in blocks {
                    z.extend_from(&b.code.bin(&messages[b.start..b.start + b.len]));
                }
            }
        }
        let key_bits = self.key_len.min(z.len());
        z.xor_prefix(&key.next_bits(key_bits));
        Ok(Encoded { z, messages, key_bits })
    }

    /// Undo the pad, then recover messages and reproductions. `ys` is
    /// required exactly when the scheme uses side information.
    pub fn decode_separation(&self, z: &[bool], key: &mut KeyStream, ys: Option<&[usize]>) -> Result<Decoded> {
        let mut plain = Bits::from(z);
        let key_bits = self.key_len.min(plain.len());
        plain.xor_prefix(&key.next_bits(key_bits));
        let n = self.params.n;
        match &self.stage {
            Stage::Plain { coders, .. } => {
                let mut messages = Vec::with_capacity(n);
                let mut pos = 0;
                for j in 0..n / self.params.m {
                    let (tuple, used) = coders[&self.tuple_pattern(j)]
                        .decode(&plain[pos..])
                        .map_err(|_| Error::Desync { stage: j * self.params.m })?;
                    pos += used;
                    messages.extend(tuple);
                }
                if pos != plain.len() {
                    return Err(Error::Desync { stage: n });
                }
                Ok(Decoded { reproduction: messages.clone(), messages })
            }
            Stage::SideInfo { first, second, message_joint, blocks } => {
                let ys = ys.ok_or_else(|| Error::Config("side information required".into()))?;
                if ys.len() != n {
                    return Err(Error::Config(format!("expected {n} side-information symbols, got {}", ys.len())));
                }
                let expected: usize = blocks.iter().map(|b| b.code.bin_bits()).sum();
                if plain.len() != expected {
                    return Err(Error::Desync { stage: 0 });
                }
                let mut messages = Vec::with_capacity(n);
                let mut pos = 0;
                for b in blocks {
                    let width = b.code.width();
                    let post: Vec<Vec<f64>> = (b.start..b.start + b.len)
                        .map(|t| {
                            let table = &message_joint[usize::from(!self.uses_first(t))];
                            posteriors_from_joint(table, &ys[t..=t], width).remove(0)
                        })
                        .collect();
                    let bits = &plain[pos..pos + b.code.bin_bits()];
                    pos += b.code.bin_bits();
                    messages.extend(b.code.decode(bits, &post, &self.params.osd));
                }
                let reproduction = messages
                    .iter()
                    .enumerate()
                    .map(|(t, &s)| {
                        let pair = if self.uses_first(t) { first } else { second };
                        pair.decode(s.min(pair.message_size() - 1), ys[t])
                    })
                    .collect();
                Ok(Decoded { messages, reproduction })
            }
        }
    }

    /// Indices of Slepian-Wolf blocks whose messages were not recovered.
    pub fn failed_blocks(&self, truth: &[usize], decoded: &[usize]) -> Vec<usize> {
        match &self.stage {
            Stage::Plain { .. } => Vec::new(),
            Stage::SideInfo { blocks, .. } => blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| truth[b.start..b.start + b.len] != decoded[b.start..b.start + b.len])
                .map(|(i, _)| i)
                .collect(),
        }
    }

    fn block_count(&self) -> usize {
        match &self.stage {
            Stage::Plain { .. } => 0,
            Stage::SideInfo { blocks, .. } => blocks.len(),
        }
    }

    pub fn mean_distortion(&self, xs: &[usize], reproduction: &[usize]) -> f64 {
        let total: f64 = xs.iter().zip(reproduction).map(|(&x, &xh)| self.distortion.get(x, xh)).sum();
        total / xs.len().max(1) as f64
    }
}

impl SecrecySystem for SeparationScheme {
    fn alphabet_size(&self) -> usize {
        self.source_size
    }

    fn key_bits(&self, _n: usize) -> usize {
        self.key_len
    }

    fn transmit(&self, xs: &[usize], key: &[bool], _private: &[bool]) -> Bits {
        let mut ks = KeyStream::scripted(Bits::from(key));
        self.encode_separation(xs, &mut ks).expect("valid source block").z
    }
}

/// `H(X|W) - coded_bits/n + key_bits/n`, a lower bound on the per-symbol
/// equivocation whenever the coded length bounds `H(Z)`.
pub fn equivocation_bound(h_x_given_w: f64, coded_bits: usize, key_bits: usize, n: usize) -> f64 {
    h_x_given_w - coded_bits as f64 / n as f64 + key_bits as f64 / n as f64
}

/// Empirical figures of one simulated block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub r_emp: f64,
    pub rk_emp: f64,
    pub d_emp: f64,
    pub h_bound: f64,
    pub sw_error: f64,
    pub sw_blocks: usize,
    pub sw_failed_blocks: usize,
    pub coded_bits: usize,
    pub key_bits: usize,
    pub osd_iteration_cap: usize,
}

/// Draw a source block (and side information), run encoder and decoder with
/// replicated keys, and measure.
pub fn run_trial(scheme: &SeparationScheme, joint: &JointSourceModel, trial: usize, seed: u64) -> Result<RunMetrics> {
    let n = scheme.n();
    let xs = sample(joint.px(), n, derive_seed(seed, 1));
    let ys = sample_channel(joint.py_given_x(), &xs, &mut ChaCha20Rng::seed_from_u64(derive_seed(seed, 2)));
    let key_seed = derive_seed(seed, 3);
    let enc = scheme.encode_separation(&xs, &mut KeyStream::seeded(key_seed))?;
    let side = scheme.has_side_information().then_some(ys.as_slice());
    let dec = scheme.decode_separation(&enc.z, &mut KeyStream::seeded(key_seed), side)?;
    let failed = scheme.failed_blocks(&enc.messages, &dec.messages).len();
    let blocks = scheme.block_count();
    Ok(RunMetrics {
        trial,
        seed,
        n,
        r_emp: enc.z.len() as f64 / n as f64,
        rk_emp: enc.key_bits as f64 / n as f64,
        d_emp: scheme.mean_distortion(&xs, &dec.reproduction),
        h_bound: equivocation_bound(scheme.entropy_bound(), enc.z.len(), enc.key_bits, n),
        sw_error: if blocks == 0 { 0.0 } else { failed as f64 / blocks as f64 },
        sw_blocks: blocks,
        sw_failed_blocks: failed,
        coded_bits: enc.z.len(),
        key_bits: enc.key_bits,
        osd_iteration_cap: scheme.params.osd.max_iterations,
    })
}

/// Independent trials in parallel; results are ordered by trial index.
pub fn run_trials(scheme: &SeparationScheme, joint: &JointSourceModel, trials: usize, seed: u64) -> Result<Vec<RunMetrics>> {
    (0..trials)
        .into_par_iter()
        .map(|i| run_trial(scheme, joint, i, derive_seed(seed, 1000 + i as u64)))
        .collect()
}
