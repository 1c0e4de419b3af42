//! Exact eavesdropper analytics.
//!
//! * Without parsing information the encrypted stream is uniform given its
//!   length, so Eve's posterior on any `X_t` depends on `l(B_n)` alone:
//!   `P(X_t = x | l(B_n) = L) = P(x) Q_{n-1}(L - l(x)) / Q_n(L)` where `Q_n` is
//!   the n-fold convolution of the codeword-length pmf.
//! * With parsing information, a stagewise encoder is checked by enumerating
//!   every source sequence, key string and private string.
//! * Equivocation `H(X^n | W^n, Z) / n` of tiny systems by brute force.

use std::collections::HashMap;

use crate::bits::Bits;
use crate::codes::InstantaneousCode;
use crate::error::{Error, Result};
use crate::keystream::{KeyStream, PrivateRandomness};
use crate::source_models::{bayes_posterior, total_variation, JointSourceModel, SourceModel};

/// Default cap on enumerated state counts.
pub const DEFAULT_STATE_LIMIT: u128 = 1_000_000;

/// Default cap on `n * max_len` for length convolutions.
pub const DEFAULT_LENGTH_LIMIT: usize = 10_000_000;

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.into_iter().collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + vals.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Pmf of a single codeword length, indexed by length.
fn length_pmf(code: &InstantaneousCode, model: &SourceModel) -> Result<Vec<f64>> {
    if code.alphabet_size() != model.alphabet_size() {
        return Err(Error::AlphabetMismatch { expected: code.alphabet_size(), actual: model.alphabet_size() });
    }
    let mut q = vec![0.0; code.max_len() + 1];
    for x in 0..model.alphabet_size() {
        q[code.len_of(x)] += model.prob(x);
    }
    Ok(q)
}

/// Law of `l(B_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthDistribution {
    n: usize,
    offset: usize,
    probs: Vec<f64>,
}

impl LengthDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn min_length(&self) -> usize {
        self.offset
    }

    pub fn max_length(&self) -> usize {
        self.offset + self.probs.len() - 1
    }

    pub fn prob(&self, length: usize) -> f64 {
        length.checked_sub(self.offset).and_then(|i| self.probs.get(i)).copied().unwrap_or(0.0)
    }

    /// `(length, probability)` over the support window.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| (self.offset + i, p))
    }
}

/// Incremental convolution of the length pmf in both the linear domain
/// (Kahan-compensated) and the log domain (for posteriors deep in the tails).
struct LengthConvolver {
    q: Vec<f64>,
    log_q: Vec<f64>,
    min_len: usize,
    n: usize,
    offset: usize,
    lin: Vec<f64>,
    log: Vec<f64>,
}

impl LengthConvolver {
    fn new(q: Vec<f64>) -> Self {
        let min_len = q.iter().position(|&p| p > 0.0).expect("length pmf has mass");
        let log_q = q.iter().map(|p| p.ln()).collect();
        LengthConvolver { q, log_q, min_len, n: 0, offset: 0, lin: vec![1.0], log: vec![0.0] }
    }

    fn max_len(&self) -> usize {
        self.q.iter().rposition(|&p| p > 0.0).expect("length pmf has mass")
    }

    fn step(&mut self) {
        let (lo, hi) = (self.min_len, self.max_len());
        let new_offset = self.offset + lo;
        let width = self.lin.len() + hi - lo;
        let mut lin = vec![0.0; width];
        let mut log = vec![f64::NEG_INFINITY; width];
        for (j, (lin_out, log_out)) in lin.iter_mut().zip(log.iter_mut()).enumerate() {
            let total = new_offset + j;
            let mut acc = Kahan::default();
            let mut terms = Vec::with_capacity(hi - lo + 1);
            for l in lo..=hi {
                if self.q[l] == 0.0 || total < l + self.offset {
                    continue;
                }
                let i = total - l - self.offset;
                if i >= self.lin.len() {
                    continue;
                }
                acc.add(self.q[l] * self.lin[i]);
                terms.push(self.log_q[l] + self.log[i]);
            }
            *lin_out = acc.sum;
            *log_out = log_sum_exp(terms);
        }
        self.n += 1;
        self.offset = new_offset;
        self.lin = lin;
        self.log = log;
    }

    fn log_at(&self, length: usize) -> f64 {
        length
            .checked_sub(self.offset)
            .and_then(|i| self.log.get(i))
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn snapshot(&self) -> LengthDistribution {
        LengthDistribution { n: self.n, offset: self.offset, probs: self.lin.clone() }
    }
}

fn guard_length(code: &InstantaneousCode, n: usize, limit: usize) -> Result<()> {
    let need = n.saturating_mul(code.max_len());
    if need > limit {
        return Err(Error::StateSpaceTooLarge { required: need as u128, limit: limit as u128 });
    }
    Ok(())
}

/// Exact `n`-fold convolution of the codeword-length pmf.
pub fn length_distribution(code: &InstantaneousCode, model: &SourceModel, n: usize) -> Result<LengthDistribution> {
    length_distribution_with_limit(code, model, n, DEFAULT_LENGTH_LIMIT)
}

pub fn length_distribution_with_limit(
    code: &InstantaneousCode,
    model: &SourceModel,
    n: usize,
    limit: usize,
) -> Result<LengthDistribution> {
    if n == 0 {
        return Err(Error::Config("length distribution needs n >= 1".into()));
    }
    guard_length(code, n, limit)?;
    let mut conv = LengthConvolver::new(length_pmf(code, model)?);
    for _ in 0..n {
        conv.step();
    }
    Ok(conv.snapshot())
}

/// Posterior of one symbol given `Q_{n-1}` in log domain and the total length.
fn posterior_from(prev: &LengthConvolver, code: &InstantaneousCode, model: &SourceModel, length: usize) -> Option<Vec<f64>> {
    let log_lik: Vec<f64> = (0..model.alphabet_size())
        .map(|x| match length.checked_sub(code.len_of(x)) {
            Some(rest) => prev.log_at(rest),
            None => f64::NEG_INFINITY,
        })
        .collect();
    // rescale before leaving the log domain so deep tails do not underflow
    let top = (0..model.alphabet_size())
        .filter(|&x| model.prob(x) > 0.0)
        .map(|x| log_lik[x])
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return None;
    }
    let lik: Vec<f64> = log_lik.iter().map(|l| (l - top).exp()).collect();
    bayes_posterior(model.pmf(), &lik)
}

/// Eve's posterior on any single `X_t` after seeing a stream of total length
/// `length` from `n` stages.
pub fn noparse_posterior(code: &InstantaneousCode, model: &SourceModel, n: usize, length: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("posterior needs n >= 1".into()));
    }
    guard_length(code, n, DEFAULT_LENGTH_LIMIT)?;
    let mut conv = LengthConvolver::new(length_pmf(code, model)?);
    for _ in 1..n {
        conv.step();
    }
    let lo = n * conv.min_len;
    let hi = n * conv.max_len();
    let outside = Error::OutsideSupport { length, min: lo, max: hi };
    if length < lo || length > hi {
        return Err(outside);
    }
    posterior_from(&conv, code, model, length).ok_or(outside)
}

/// Posterior and its distance to the prior at one total length.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthPosterior {
    pub length: usize,
    pub prob: f64,
    pub posterior: Vec<f64>,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorReport {
    pub n: usize,
    pub per_length: Vec<LengthPosterior>,
    /// `sum_L Q_n(L) TV(L)`.
    pub expected_tv: f64,
    /// Largest TV over lengths of positive probability.
    pub max_tv: f64,
}

fn report_at(prev: &LengthConvolver, cur: &LengthConvolver, code: &InstantaneousCode, model: &SourceModel) -> PosteriorReport {
    let mut per_length = Vec::new();
    let mut expected = Kahan::default();
    let mut max_tv: f64 = 0.0;
    for (i, &prob) in cur.lin.iter().enumerate() {
        let length = cur.offset + i;
        let Some(posterior) = posterior_from(prev, code, model, length) else {
            continue;
        };
        let tv = total_variation(&posterior, model.pmf());
        expected.add(prob * tv);
        if prob > 0.0 {
            max_tv = max_tv.max(tv);
        }
        per_length.push(LengthPosterior { length, prob, posterior, tv });
    }
    PosteriorReport { n: cur.n, per_length, expected_tv: expected.sum, max_tv }
}

/// Full per-length posterior table at one `n`.
pub fn posterior_report(code: &InstantaneousCode, model: &SourceModel, n: usize) -> Result<PosteriorReport> {
    Ok(convergence_reports(code, model, &[n])?.remove(0))
}

/// Posterior reports along an ascending list of stream lengths, sharing one
/// convolution pass.
pub fn convergence_reports(code: &InstantaneousCode, model: &SourceModel, n_list: &[usize]) -> Result<Vec<PosteriorReport>> {
    if n_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("n list must be sorted ascending".into()));
    }
    if n_list.first() == Some(&0) {
        return Err(Error::Config("n must be >= 1".into()));
    }
    if let Some(&last) = n_list.last() {
        guard_length(code, last, DEFAULT_LENGTH_LIMIT)?;
    }
    let mut prev = LengthConvolver::new(length_pmf(code, model)?);
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        while prev.n + 1 < n {
            prev.step();
        }
        let mut cur = LengthConvolver { lin: prev.lin.clone(), log: prev.log.clone(), q: prev.q.clone(), log_q: prev.log_q.clone(), ..prev };
        cur.step();
        out.push(report_at(&prev, &cur, code, model));
    }
    Ok(out)
}

/// `(n, expected TV)` along `n_list`.
pub fn convergence_curve(code: &InstantaneousCode, model: &SourceModel, n_list: &[usize]) -> Result<Vec<(usize, f64)>> {
    Ok(convergence_reports(code, model, n_list)?.into_iter().map(|r| (r.n, r.expected_tv)).collect())
}

/// A zero-delay encoder of the form `Z_t = f(K_t, V_t, X^t, past)`, run one
/// stage at a time against explicit key and private streams.
pub trait StagewiseEncoder {
    fn alphabet_size(&self) -> usize;
    /// Upper bound on fresh key bits drawn in one stage.
    fn max_key_bits(&self) -> usize;
    /// Upper bound on private random bits drawn in one stage.
    fn max_private_bits(&self) -> usize;
    /// `symbols` is `x^t` (current symbol last); `past_keys` the keys drawn
    /// in earlier stages.
    fn encode_stage(&self, symbols: &[usize], past_keys: &[Bits], key: &mut KeyStream, private: &mut PrivateRandomness) -> Bits;
}

/// One aggregated outcome of a `t`-stage run.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub symbols: Vec<usize>,
    pub keys: Vec<Bits>,
    pub outputs: Vec<Bits>,
    pub prob: f64,
}

fn checked_space(alphabet: usize, stages: usize, random_bits: usize, limit: u128) -> Result<()> {
    let mut required: u128 = 1;
    for _ in 0..stages {
        required = required.saturating_mul(alphabet as u128);
    }
    required = required.saturating_mul(1u128.checked_shl(random_bits as u32).unwrap_or(u128::MAX));
    if random_bits >= 127 || required > limit {
        return Err(Error::StateSpaceTooLarge { required, limit });
    }
    Ok(())
}

fn for_each_sequence(alphabet: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut seq = vec![0; len];
    loop {
        f(&seq);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < alphabet {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// Exact joint law of `(x^t, k^t, z^t)` by running the encoder on every
/// source sequence, key string and private string.
pub fn enumerate_stages<E: StagewiseEncoder + ?Sized>(
    encoder: &E,
    model: &SourceModel,
    stages: usize,
    limit: u128,
) -> Result<Vec<StageOutcome>> {
    if model.alphabet_size() != encoder.alphabet_size() {
        return Err(Error::AlphabetMismatch { expected: encoder.alphabet_size(), actual: model.alphabet_size() });
    }
    let key_len = stages * encoder.max_key_bits();
    let priv_len = stages * encoder.max_private_bits();
    checked_space(model.alphabet_size(), stages, key_len + priv_len, limit)?;
    let weight = 0.5f64.powi((key_len + priv_len) as i32);
    let mut table: HashMap<(Vec<usize>, Vec<Bits>, Vec<Bits>), f64> = HashMap::new();
    for_each_sequence(model.alphabet_size(), stages, |xs| {
        let px = model.sequence_prob(xs);
        if px == 0.0 {
            return;
        }
        for u in 0..1u64 << key_len {
            let u_bits = Bits::from_uint(u, key_len);
            for v in 0..1u64 << priv_len {
                let mut key = KeyStream::scripted(u_bits.clone());
                let mut private = PrivateRandomness::scripted(Bits::from_uint(v, priv_len));
                let mut keys = Vec::with_capacity(stages);
                let mut outputs = Vec::with_capacity(stages);
                let mut pos = 0;
                for t in 0..stages {
                    let z = encoder.encode_stage(&xs[..=t], &keys, &mut key, &mut private);
                    let used = key.consumed_bits();
                    keys.push(Bits::from(&u_bits[pos..used]));
                    pos = used;
                    outputs.push(z);
                }
                *table.entry((xs.to_vec(), keys, outputs)).or_insert(0.0) += px * weight;
            }
        }
    });
    let mut out: Vec<StageOutcome> = table
        .into_iter()
        .map(|((symbols, keys, outputs), prob)| StageOutcome { symbols, keys, outputs, prob })
        .collect();
    out.sort_by(|a, b| (&a.symbols, &a.keys, &a.outputs).cmp(&(&b.symbols, &b.keys, &b.outputs)));
    Ok(out)
}

/// TV distance between `P(x^t, z^t)` and `P(x^t) P(z^t)`; zero exactly for a
/// perfectly secret encoder.
pub fn joint_independence_tv<E: StagewiseEncoder + ?Sized>(encoder: &E, model: &SourceModel, stages: usize) -> Result<f64> {
    let outcomes = enumerate_stages(encoder, model, stages, DEFAULT_STATE_LIMIT)?;
    let mut joint: HashMap<(&[usize], &[Bits]), f64> = HashMap::new();
    let mut pz: HashMap<&[Bits], f64> = HashMap::new();
    for o in &outcomes {
        *joint.entry((&o.symbols, &o.outputs)).or_insert(0.0) += o.prob;
        *pz.entry(&o.outputs).or_insert(0.0) += o.prob;
    }
    let mut px: HashMap<&[usize], f64> = HashMap::new();
    for o in &outcomes {
        px.entry(&o.symbols).or_insert_with(|| model.sequence_prob(&o.symbols));
    }
    let mut tv = Kahan::default();
    for (&xs, &p_x) in &px {
        for (&zs, &p_z) in &pz {
            let p = joint.get(&(xs, zs)).copied().unwrap_or(0.0);
            tv.add((p - p_x * p_z).abs());
        }
    }
    Ok(0.5 * tv.sum)
}

/// Largest violation of `X_t - Z^t - K^{t-1}`:
/// `max |P(k^{t-1} | x_t, z^t) - P(k^{t-1} | z^t)|`.
pub fn markov_chain_check<E: StagewiseEncoder + ?Sized>(encoder: &E, model: &SourceModel, horizon: usize) -> Result<f64> {
    markov_chain_check_with_limit(encoder, model, horizon, DEFAULT_STATE_LIMIT)
}

pub fn markov_chain_check_with_limit<E: StagewiseEncoder + ?Sized>(
    encoder: &E,
    model: &SourceModel,
    horizon: usize,
    limit: u128,
) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    let outcomes = enumerate_stages(encoder, model, horizon, limit)?;
    type Key<'a> = &'a [Bits];
    let mut p_kxz: HashMap<(Key, usize, Key), f64> = HashMap::new();
    let mut p_xz: HashMap<(usize, Key), f64> = HashMap::new();
    let mut p_kz: HashMap<(Key, Key), f64> = HashMap::new();
    let mut p_z: HashMap<Key, f64> = HashMap::new();
    for o in &outcomes {
        let k = &o.keys[..horizon - 1];
        let x = o.symbols[horizon - 1];
        let z = o.outputs.as_slice();
        *p_kxz.entry((k, x, z)).or_insert(0.0) += o.prob;
        *p_xz.entry((x, z)).or_insert(0.0) += o.prob;
        *p_kz.entry((k, z)).or_insert(0.0) += o.prob;
        *p_z.entry(z).or_insert(0.0) += o.prob;
    }
    let mut keys_given_z: HashMap<Key, Vec<Key>> = HashMap::new();
    for &(k, z) in p_kz.keys() {
        keys_given_z.entry(z).or_default().push(k);
    }
    let mut worst: f64 = 0.0;
    for (&(x, z), &pxz) in &p_xz {
        if pxz <= 0.0 {
            continue;
        }
        for &k in &keys_given_z[z] {
            let joint = p_kxz.get(&(k, x, z)).copied().unwrap_or(0.0);
            let dev = (joint / pxz - p_kz[&(k, z)] / p_z[z]).abs();
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// Stage 1 encrypts a fixed-length codeword with fresh key bits; every later
/// stage reuses those same key bits and draws nothing new. A deliberately
/// insecure negative control for [`markov_chain_check`].
#[derive(Debug, Clone)]
pub struct KeyReuseEncoder {
    code: InstantaneousCode,
}

impl KeyReuseEncoder {
    pub fn new(alphabet_size: usize) -> Result<Self> {
        Ok(KeyReuseEncoder { code: InstantaneousCode::fixed_length(alphabet_size)? })
    }
}

impl StagewiseEncoder for KeyReuseEncoder {
    fn alphabet_size(&self) -> usize {
        self.code.alphabet_size()
    }

    fn max_key_bits(&self) -> usize {
        self.code.max_len()
    }

    fn max_private_bits(&self) -> usize {
        0
    }

    fn encode_stage(&self, symbols: &[usize], past_keys: &[Bits], key: &mut KeyStream, _private: &mut PrivateRandomness) -> Bits {
        let word = self.code.codeword(*symbols.last().expect("current symbol"));
        match past_keys.first() {
            None => word.xor(&key.next_bits(word.len())),
            Some(k1) => word.xor(k1),
        }
    }
}

/// A system mapping a whole source block and uniform random strings to the
/// transmission `Z`.
pub trait SecrecySystem {
    fn alphabet_size(&self) -> usize;
    /// Shared key bits enumerated for a block of `n` symbols.
    fn key_bits(&self, n: usize) -> usize;
    /// Private random bits enumerated for a block of `n` symbols.
    fn private_bits(&self, _n: usize) -> usize {
        0
    }
    fn transmit(&self, xs: &[usize], key: &[bool], private: &[bool]) -> Bits;
}

/// A prefix code over the whole block with the first `key_bits` coded bits
/// XORed with key (clamped to the coded length). `key_bits = 0` is plain
/// lossless coding; a large value is a full one-time pad.
#[derive(Debug, Clone)]
pub struct PartialOtpSystem {
    pub code: InstantaneousCode,
    pub key_bits: usize,
}

impl SecrecySystem for PartialOtpSystem {
    fn alphabet_size(&self) -> usize {
        self.code.alphabet_size()
    }

    fn key_bits(&self, n: usize) -> usize {
        self.key_bits.min(n * self.code.max_len())
    }

    fn transmit(&self, xs: &[usize], key: &[bool], _private: &[bool]) -> Bits {
        let mut z = self.code.encode_seq(xs);
        z.xor_prefix(key);
        z
    }
}

/// Exact entropies of a tiny system, in bits per block of `n` symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSecrecy {
    pub n: usize,
    /// `H(X^n | W^n, Z)`.
    pub equivocation: f64,
    /// `H(Z)`.
    pub output_entropy: f64,
    /// `E l(Z)`.
    pub mean_output_len: f64,
}

impl ExactSecrecy {
    pub fn per_symbol(&self) -> f64 {
        self.equivocation / self.n as f64
    }
}

fn entropy_of_map<K>(m: &HashMap<K, f64>) -> f64 {
    let mut acc = Kahan::default();
    for &p in m.values() {
        if p > 0.0 {
            acc.add(-p * p.log2());
        }
    }
    acc.sum
}

/// `(1/n) H(X^n | W^n, Z)` by building the full joint law. Use
/// [`JointSourceModel::without_side_information`] for `H(X^n | Z)`.
pub fn exact_equivocation<S: SecrecySystem + ?Sized>(system: &S, joint: &JointSourceModel, n: usize) -> Result<f64> {
    Ok(exact_secrecy(system, joint, n, DEFAULT_STATE_LIMIT)?.per_symbol())
}

pub fn exact_secrecy<S: SecrecySystem + ?Sized>(system: &S, joint: &JointSourceModel, n: usize, limit: u128) -> Result<ExactSecrecy> {
    if n == 0 || n > 8 {
        return Err(Error::Config("exact equivocation supports 1 <= n <= 8".into()));
    }
    if system.alphabet_size() != joint.x_size() {
        return Err(Error::AlphabetMismatch { expected: system.alphabet_size(), actual: joint.x_size() });
    }
    let kb = system.key_bits(n);
    let vb = system.private_bits(n);
    let pw_x = joint.pw_given_x();
    let w_size = joint.w_size();
    let mut required = (joint.x_size() as u128).pow(n as u32).saturating_mul((w_size as u128).pow(n as u32));
    required = required.saturating_mul(1u128.checked_shl((kb + vb) as u32).unwrap_or(u128::MAX));
    if kb + vb >= 127 || required > limit {
        return Err(Error::StateSpaceTooLarge { required, limit });
    }
    let weight = 0.5f64.powi((kb + vb) as i32);
    let mut p_xwz: HashMap<(Vec<usize>, Vec<usize>, Bits), f64> = HashMap::new();
    let mut p_wz: HashMap<(Vec<usize>, Bits), f64> = HashMap::new();
    let mut p_z: HashMap<Bits, f64> = HashMap::new();
    let mut mean_len = Kahan::default();
    let px = joint.px();
    for_each_sequence(joint.x_size(), n, |xs| {
        let p_x = px.sequence_prob(xs);
        if p_x == 0.0 {
            return;
        }
        let mut outputs: HashMap<Bits, f64> = HashMap::new();
        for k in 0..1u64 << kb {
            let key = Bits::from_uint(k, kb);
            for v in 0..1u64 << vb {
                let z = system.transmit(xs, &key, &Bits::from_uint(v, vb));
                *outputs.entry(z).or_insert(0.0) += weight;
            }
        }
        for_each_sequence(w_size, n, |ws| {
            let p_w: f64 = xs.iter().zip(ws).map(|(&x, &w)| pw_x[x][w]).product();
            if p_w == 0.0 {
                return;
            }
            for (z, &pz) in &outputs {
                let p = p_x * p_w * pz;
                *p_xwz.entry((xs.to_vec(), ws.to_vec(), z.clone())).or_insert(0.0) += p;
                *p_wz.entry((ws.to_vec(), z.clone())).or_insert(0.0) += p;
            }
        });
        for (z, &pz) in &outputs {
            *p_z.entry(z.clone()).or_insert(0.0) += p_x * pz;
            mean_len.add(p_x * pz * z.len() as f64);
        }
    });
    Ok(ExactSecrecy {
        n,
        equivocation: entropy_of_map(&p_xwz) - entropy_of_map(&p_wz),
        output_entropy: entropy_of_map(&p_z),
        mean_output_len: mean_len.sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::codes::build_huffman;
    use crate::zd_block::BlockScheme;

    fn dyadic() -> SourceModel {
        SourceModel::new(vec![0.5, 0.25, 0.25]).unwrap()
    }

    #[test]
    fn length_distribution_examples() {
        let m = dyadic();
        let c = build_huffman(&m);
        let d1 = length_distribution(&c, &m, 1).unwrap();
        assert_eq!((d1.prob(1), d1.prob(2)), (0.5, 0.5));
        let d2 = length_distribution(&c, &m, 2).unwrap();
        assert_eq!((d2.prob(2), d2.prob(3), d2.prob(4)), (0.25, 0.5, 0.25));
        let fixed = InstantaneousCode::fixed_length(3).unwrap();
        let d = length_distribution(&fixed, &m, 7).unwrap();
        assert_eq!(d.prob(14), 1.0);
        assert_eq!(d.min_length(), 14);
        assert_eq!(d.max_length(), 14);
        assert!(matches!(
            length_distribution_with_limit(&c, &m, 1000, 100),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn posterior_single_stage() {
        let m = dyadic();
        let c = build_huffman(&m);
        let p = noparse_posterior(&c, &m, 1, 2).unwrap();
        assert!((p[0]).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
        assert!(matches!(noparse_posterior(&c, &m, 1, 3), Err(Error::OutsideSupport { .. })));
    }

    #[test]
    fn all_short_codewords_reveal_everything() {
        let m = dyadic();
        let c = build_huffman(&m);
        for n in [1, 5, 50, 400] {
            let p = noparse_posterior(&c, &m, n, n).unwrap();
            assert_eq!(p, vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn posterior_tightens_with_n() {
        let m = dyadic();
        let c = build_huffman(&m);
        let curve = convergence_curve(&c, &m, &[10, 100, 1000]).unwrap();
        assert!(curve[0].1 > curve[1].1 && curve[1].1 > curve[2].1);
    }

    #[test]
    fn report_invariants() {
        let m = SourceModel::new(vec![0.45, 0.3, 0.15, 0.1]).unwrap();
        let c = build_huffman(&m);
        for r in convergence_reports(&c, &m, &[1, 3, 20, 150]).unwrap() {
            let mut marginal = vec![0.0; 4];
            for lp in &r.per_length {
                assert!((lp.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for (acc, p) in marginal.iter_mut().zip(&lp.posterior) {
                    *acc += lp.prob * p;
                }
            }
            for (a, b) in marginal.iter().zip(m.pmf()) {
                assert!((a - b).abs() < 1e-10, "total probability broken at n={}", r.n);
            }
            let expected: f64 = r.per_length.iter().map(|lp| lp.prob * lp.tv).sum();
            assert!((expected - r.expected_tv).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_curves_are_zero() {
        let m = dyadic();
        let fixed = InstantaneousCode::fixed_length(3).unwrap();
        for (_, tv) in convergence_curve(&fixed, &m, &[1, 10, 100]).unwrap() {
            assert!(tv.abs() < 1e-15);
        }
        let pm = SourceModel::point_mass(3, 1).unwrap();
        for (_, tv) in convergence_curve(&build_huffman(&pm), &pm, &[1, 10, 100]).unwrap() {
            assert!(tv.abs() < 1e-15);
        }
        assert!(convergence_curve(&fixed, &m, &[10, 5]).is_err());
    }

    #[test]
    fn block_scheme_satisfies_markov_chain() {
        for pmf in [vec![0.7, 0.3], vec![0.5, 0.3, 0.2]] {
            let m = SourceModel::new(pmf).unwrap();
            let s = BlockScheme::huffman(&m);
            assert_eq!(markov_chain_check(&s, &m, 1).unwrap(), 0.0);
            assert!(markov_chain_check(&s, &m, 2).unwrap() < 1e-12);
        }
    }

    #[test]
    fn key_reuse_violates_markov_chain() {
        let m = SourceModel::new(vec![0.5, 0.5]).unwrap();
        let enc = KeyReuseEncoder::new(2).unwrap();
        // Given z^2 and x_2 the reused key bit is k = z_2 xor x_2; without
        // x_2 it is a fair coin.
        let dev = markov_chain_check(&enc, &m, 2).unwrap();
        assert!((dev - 0.5).abs() < 1e-12);
    }

    #[test]
    fn state_space_guard() {
        let m = SourceModel::uniform(5).unwrap();
        let s = BlockScheme::huffman(&m);
        assert!(matches!(
            markov_chain_check_with_limit(&s, &m, 3, 1000),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn equivocation_examples() {
        let bin = JointSourceModel::without_side_information(SourceModel::uniform(2).unwrap());
        let one_bit = InstantaneousCode::new(vec![bits("0"), bits("1")]).unwrap();
        let full = PartialOtpSystem { code: one_bit.clone(), key_bits: 64 };
        assert!((exact_equivocation(&full, &bin, 2).unwrap() - 1.0).abs() < 1e-12);
        let none = PartialOtpSystem { code: one_bit.clone(), key_bits: 0 };
        assert!(exact_equivocation(&none, &bin, 3).unwrap().abs() < 1e-12);
        let half = PartialOtpSystem { code: one_bit, key_bits: 2 };
        assert!((exact_equivocation(&half, &bin, 4).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equivocation_bounded_by_conditional_entropy() {
        let px = SourceModel::new(vec![0.6, 0.3, 0.1]).unwrap();
        let j = JointSourceModel::new(
            px.clone(),
            vec![vec![0.8, 0.2], vec![0.3, 0.7], vec![0.5, 0.5]],
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        )
        .unwrap();
        let sys = PartialOtpSystem { code: build_huffman(&px), key_bits: 3 };
        let h = exact_equivocation(&sys, &j, 3).unwrap();
        assert!(h <= j.h_x_given_w() + 1e-12);
        assert!(h <= px.entropy() + 1e-12);
    }
}
