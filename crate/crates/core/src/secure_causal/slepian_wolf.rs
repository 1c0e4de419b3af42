//! Linear random binning over symbol labels and an approximate
//! maximum-likelihood decoder.
//!
//! Each symbol is written as a `width`-bit label (MSB first). A block of labels
//! is binned by a seeded random GF(2) matrix. The decoder runs ordered
//! statistics decoding: Gaussian elimination places the pivots on the least
//! reliable bit positions, the remaining positions take their hard decisions
//! (optionally with up to `order` flips inside a window), and the pivots are
//! solved from the bin index. Later iterations reshuffle the order with
//! seeded noise, which turns the search into information-set decoding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::bits::Bits;
use crate::codes::ceil_log2;
use crate::keystream::derive_seed;

const LLR_CAP: f64 = 60.0;

/// Search budget of the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OsdConfig {
    /// Cap on elimination passes per block.
    pub max_iterations: usize,
    /// Stop after this many passes without a better candidate.
    pub patience: usize,
    /// Largest number of simultaneous flips among non-pivot positions.
    pub order: usize,
    /// Flips are drawn from this many least reliable non-pivot positions.
    pub window: usize,
    /// Stop once a candidate's soft distance to the hard decisions is within
    /// this many standard deviations above the mean distance of the true
    /// sequence. Negative disables the rule.
    pub typical_sigmas: f64,
}

impl Default for OsdConfig {
    fn default() -> Self {
        OsdConfig { max_iterations: 256, patience: 256, order: 2, window: 56, typical_sigmas: 1.0 }
    }
}

type Row = Vec<u64>;

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn get(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn flip(row: &mut [u64], i: usize) {
    row[i / 64] ^= 1 << (i % 64);
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// A binning map from `symbols` labels of `width` bits to `bin_bits` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct SwCode {
    symbols: usize,
    width: usize,
    bin_bits: usize,
    seed: u64,
    /// `None` means identity binning: the bin index is the label string.
    rows: Option<Vec<Row>>,
}

impl SwCode {
    /// Random linear binning to `bin_bits` bits, or identity binning when
    /// `bin_bits` covers every label bit.
    pub fn new(symbols: usize, width: usize, bin_bits: usize, seed: u64) -> Self {
        let n = symbols * width;
        if bin_bits >= n {
            return SwCode::identity(symbols, width, seed);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let w = words(n);
        let tail = n % 64;
        let rows = (0..bin_bits)
            .map(|_| {
                let mut row: Row = (0..w).map(|_| rng.gen()).collect();
                if tail != 0 {
                    row[w - 1] &= (1u64 << tail) - 1;
                }
                row
            })
            .collect();
        SwCode { symbols, width, bin_bits, seed, rows: Some(rows) }
    }

    pub fn identity(symbols: usize, width: usize, seed: u64) -> Self {
        SwCode { symbols, width, bin_bits: symbols * width, seed, rows: None }
    }

    /// Binning for an alphabet of `alphabet` labels at `rate` bits/symbol.
    /// A rate of at least `log2 alphabet` selects identity binning.
    pub fn for_rate(symbols: usize, alphabet: usize, rate: f64, seed: u64) -> Self {
        let width = ceil_log2(alphabet);
        if rate >= (alphabet as f64).log2() - 1e-12 {
            return SwCode::identity(symbols, width, seed);
        }
        let bin_bits = (symbols as f64 * rate.max(0.0)).ceil() as usize;
        SwCode::new(symbols, width, bin_bits, seed)
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bin_bits(&self) -> usize {
        self.bin_bits
    }

    pub fn is_identity(&self) -> bool {
        self.rows.is_none()
    }

    fn label_row(&self, labels: &[usize]) -> Row {
        let mut row = vec![0u64; words(self.symbols * self.width)];
        for (t, &s) in labels.iter().enumerate() {
            for j in 0..self.width {
                if s >> (self.width - 1 - j) & 1 == 1 {
                    flip(&mut row, t * self.width + j);
                }
            }
        }
        row
    }

    fn labels_of(&self, row: &[u64]) -> Vec<usize> {
        (0..self.symbols)
            .map(|t| (0..self.width).fold(0, |acc, j| acc << 1 | get(row, t * self.width + j) as usize))
            .collect()
    }

    pub fn bin(&self, labels: &[usize]) -> Bits {
        assert_eq!(labels.len(), self.symbols, "block length");
        let u = self.label_row(labels);
        match &self.rows {
            None => (0..self.bin_bits).map(|i| get(&u, i)).collect(),
            Some(rows) => rows
                .iter()
                .map(|r| r.iter().zip(&u).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1)
                .collect(),
        }
    }

    /// Best labels found in the bin, given per-position posteriors
    /// `posteriors[t][label]` (labels beyond the alphabet must carry 0).
    pub fn decode(&self, bin: &[bool], posteriors: &[Vec<f64>], cfg: &OsdConfig) -> Vec<usize> {
        assert_eq!(bin.len(), self.bin_bits, "bin index length");
        assert_eq!(posteriors.len(), self.symbols, "posterior count");
        let Some(rows) = &self.rows else {
            let mut u = vec![0u64; words(self.bin_bits)];
            for (i, &b) in bin.iter().enumerate() {
                if b {
                    flip(&mut u, i);
                }
            }
            return self.labels_of(&u);
        };
        Osd::new(self, rows, bin, posteriors).run(cfg, derive_seed(self.seed, 0xD0))
    }
}

struct Osd<'a> {
    code: &'a SwCode,
    rows: &'a [Row],
    bin: &'a [bool],
    posteriors: &'a [Vec<f64>],
    hard: Vec<bool>,
    rel: Vec<f64>,
}

struct Candidate {
    u: Row,
    score: f64,
    cost: f64,
}

impl<'a> Osd<'a> {
    fn new(code: &'a SwCode, rows: &'a [Row], bin: &'a [bool], posteriors: &'a [Vec<f64>]) -> Self {
        let n = code.symbols * code.width;
        let mut hard = vec![false; n];
        let mut rel = vec![0.0; n];
        for (t, post) in posteriors.iter().enumerate() {
            for j in 0..code.width {
                let shift = code.width - 1 - j;
                let p1: f64 = post.iter().enumerate().filter(|(s, _)| s >> shift & 1 == 1).map(|(_, p)| p).sum();
                let p0: f64 = post.iter().enumerate().filter(|(s, _)| s >> shift & 1 == 0).map(|(_, p)| p).sum();
                let llr = (p0.ln() - p1.ln()).clamp(-LLR_CAP, LLR_CAP);
                let llr = if llr.is_nan() { 0.0 } else { llr };
                hard[t * code.width + j] = llr < 0.0;
                rel[t * code.width + j] = llr.abs();
            }
        }
        Osd { code, rows, bin, posteriors, hard, rel }
    }

    fn exact_score(&self, u: &[u64]) -> f64 {
        self.code
            .labels_of(u)
            .iter()
            .zip(self.posteriors)
            .map(|(&s, post)| post.get(s).copied().unwrap_or(0.0).ln())
            .sum()
    }

    fn run(&self, cfg: &OsdConfig, seed: u64) -> Vec<usize> {
        let n = self.hard.len();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let scale = (self.rel.iter().sum::<f64>() / n.max(1) as f64).max(1e-3);
        // distance of the true sequence: each bit is wrong with probability
        // 1 / (1 + e^rel) and then costs rel
        let (mean, var) = self.rel.iter().fold((0.0, 0.0), |(m, v), &r| {
            let p = 1.0 / (1.0 + r.exp());
            (m + r * p, v + r * r * p * (1.0 - p))
        });
        let typical = if cfg.typical_sigmas < 0.0 { f64::NEG_INFINITY } else { mean + cfg.typical_sigmas * var.sqrt() };
        let mut best: Option<Candidate> = None;
        let mut stale = 0;
        for iter in 0..cfg.max_iterations.max(1) {
            let mut keys: Vec<(f64, usize)> = (0..n)
                .map(|i| {
                    let noise = if iter == 0 { 0.0 } else { -scale * (1.0 - rng.gen::<f64>()).ln() };
                    (self.rel[i] + noise, i)
                })
                .collect();
            keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let order: Vec<usize> = keys.into_iter().map(|(_, i)| i).collect();
            let cand = self.pass(&order, cfg);
            let improved = match &best {
                None => true,
                Some(b) => cand.score > b.score + 1e-12,
            };
            if improved {
                let done = cand.cost <= typical && cand.score > f64::NEG_INFINITY;
                best = Some(cand);
                stale = 0;
                if done {
                    break;
                }
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        }
        self.code.labels_of(&best.expect("at least one pass").u)
    }

    /// One elimination with pivots taken along `order`, then a flip search.
    fn pass(&self, order: &[usize], cfg: &OsdConfig) -> Candidate {
        let stride = words(self.hard.len());
        let mut a: Vec<u64> = self.rows.iter().flatten().copied().collect();
        let n_rows = self.rows.len();
        let mut syn: Vec<bool> = self.bin.to_vec();
        let mut pivots: Vec<usize> = Vec::new();
        let mut is_pivot = vec![false; self.hard.len()];
        let mut pivot_row = vec![0u64; stride];
        for &col in order {
            let rank = pivots.len();
            if rank == n_rows {
                break;
            }
            let (cw, cb) = (col / 64, col % 64);
            let Some(r) = (rank..n_rows).find(|&r| a[r * stride + cw] >> cb & 1 == 1) else {
                continue;
            };
            if r != rank {
                for w in 0..stride {
                    a.swap(rank * stride + w, r * stride + w);
                }
                syn.swap(rank, r);
            }
            pivot_row.copy_from_slice(&a[rank * stride..(rank + 1) * stride]);
            let pivot_syn = syn[rank];
            for i in 0..n_rows {
                let row = &mut a[i * stride..(i + 1) * stride];
                if i != rank && row[cw] >> cb & 1 == 1 {
                    xor_into(row, &pivot_row);
                    syn[i] ^= pivot_syn;
                }
            }
            pivots.push(col);
            is_pivot[col] = true;
        }
        let rank = pivots.len();
        let rw = words(rank);
        let non_pivots: Vec<usize> = order.iter().copied().filter(|&c| !is_pivot[c]).collect();
        // column of each non-pivot restricted to the pivot rows
        let columns: Vec<Row> = non_pivots
            .iter()
            .map(|&c| {
                let mut v = vec![0u64; rw];
                for i in 0..rank {
                    if get(&a[i * stride..(i + 1) * stride], c) {
                        flip(&mut v, i);
                    }
                }
                v
            })
            .collect();
        let mut base = vec![0u64; rw];
        for (i, &s) in syn.iter().take(rank).enumerate() {
            if s {
                flip(&mut base, i);
            }
        }
        for (k, &c) in non_pivots.iter().enumerate() {
            if self.hard[c] {
                xor_into(&mut base, &columns[k]);
            }
        }
        // base now holds the pivot bits; measure disagreement with hard decisions
        let mut hard_p = vec![0u64; rw];
        for (i, &c) in pivots.iter().enumerate() {
            if self.hard[c] {
                flip(&mut hard_p, i);
            }
        }
        xor_into(&mut base, &hard_p);
        let pivot_cost = |diff: &[u64]| -> f64 {
            let mut cost = 0.0;
            for (w, &word) in diff.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let i = w * 64 + bits.trailing_zeros() as usize;
                    cost += self.rel[pivots[i]];
                    bits &= bits - 1;
                }
            }
            cost
        };
        let window = cfg.window.min(non_pivots.len());
        let mut best_flips: Vec<usize> = Vec::new();
        let mut best_cost = pivot_cost(&base);
        let mut flips = Vec::new();
        let mut scratch = base.clone();
        self.search(&columns[..window], &non_pivots[..window], cfg.order, 0, 0.0, &mut flips, &mut scratch, &pivot_cost, &mut best_cost, &mut best_flips);

        let mut u = vec![0u64; words(self.hard.len())];
        let mut diff = base;
        for &k in &best_flips {
            xor_into(&mut diff, &columns[k]);
        }
        for (i, &c) in pivots.iter().enumerate() {
            if get(&diff, i) != self.hard[c] {
                flip(&mut u, c);
            }
        }
        for (k, &c) in non_pivots.iter().enumerate() {
            if self.hard[c] != best_flips.contains(&k) {
                flip(&mut u, c);
            }
        }
        let score = self.exact_score(&u);
        Candidate { u, score, cost: best_cost }
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        columns: &[Row],
        positions: &[usize],
        depth: usize,
        start: usize,
        flip_cost: f64,
        flips: &mut Vec<usize>,
        diff: &mut Row,
        pivot_cost: &dyn Fn(&[u64]) -> f64,
        best_cost: &mut f64,
        best_flips: &mut Vec<usize>,
    ) {
        if depth == 0 {
            return;
        }
        for k in start..columns.len() {
            let cost = flip_cost + self.rel[positions[k]];
            if cost >= *best_cost {
                continue;
            }
            xor_into(diff, &columns[k]);
            flips.push(k);
            let total = cost + pivot_cost(diff);
            if total < *best_cost {
                *best_cost = total;
                *best_flips = flips.clone();
            }
            self.search(columns, positions, depth - 1, k + 1, cost, flips, diff, pivot_cost, best_cost, best_flips);
            flips.pop();
            xor_into(diff, &columns[k]);
        }
    }
}

/// Result of binning one sequence and decoding it against side information.
#[derive(Debug, Clone, PartialEq)]
pub struct SwOutcome {
    pub bin: Bits,
    pub decoded: Vec<usize>,
    pub error: bool,
}

/// Per-position posteriors `P(s | y_t)` from a joint table `joint_sy[s][y]`,
/// padded with zeros up to `2^width` labels.
pub fn posteriors_from_joint(joint_sy: &[Vec<f64>], ys: &[usize], width: usize) -> Vec<Vec<f64>> {
    let labels = 1usize << width;
    ys.iter()
        .map(|&y| {
            let py: f64 = joint_sy.iter().map(|row| row[y]).sum();
            (0..labels)
                .map(|s| if s < joint_sy.len() && py > 0.0 { joint_sy[s][y] / py } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Bin `s_seq` at `sw_rate` bits/symbol with a code drawn from `seed`, then
/// decode it from `y_seq` under the joint law `joint_sy[s][y]`.
pub fn slepian_wolf_binning(s_seq: &[usize], y_seq: &[usize], joint_sy: &[Vec<f64>], sw_rate: f64, seed: u64) -> SwOutcome {
    slepian_wolf_binning_with(s_seq, y_seq, joint_sy, sw_rate, seed, &OsdConfig::default())
}

pub fn slepian_wolf_binning_with(
    s_seq: &[usize],
    y_seq: &[usize],
    joint_sy: &[Vec<f64>],
    sw_rate: f64,
    seed: u64,
    cfg: &OsdConfig,
) -> SwOutcome {
    assert_eq!(s_seq.len(), y_seq.len(), "sequence lengths");
    let code = SwCode::for_rate(s_seq.len(), joint_sy.len(), sw_rate, seed);
    let bin = code.bin(s_seq);
    let post = posteriors_from_joint(joint_sy, y_seq, code.width());
    let decoded = code.decode(&bin, &post, cfg);
    let error = decoded != s_seq;
    SwOutcome { bin, decoded, error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source_models::{binary_entropy, sample, sample_channel, symmetric_channel_matrix, SourceModel};

    fn dsbs_joint(p: f64) -> Vec<Vec<f64>> {
        vec![vec![0.5 * (1.0 - p), 0.5 * p], vec![0.5 * p, 0.5 * (1.0 - p)]]
    }

    fn draw(n: usize, p: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let s = sample(&SourceModel::uniform(2).unwrap(), n, seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xABCD);
        let y = sample_channel(&symmetric_channel_matrix(2, p), &s, &mut rng);
        (s, y)
    }

    #[test]
    fn bin_is_linear() {
        let code = SwCode::new(20, 1, 8, 3);
        let a: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let b: Vec<usize> = (0..20).map(|i| (i / 3) % 2).collect();
        let c: Vec<usize> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        assert_eq!(code.bin(&a).xor(&code.bin(&b)), code.bin(&c));
    }

    #[test]
    fn identity_binning_decodes_exactly() {
        let (s, y) = draw(100, 0.3, 1);
        let out = slepian_wolf_binning(&s, &y, &dsbs_joint(0.3), 1.0, 9);
        assert!(!out.error);
        assert_eq!(out.bin.len(), 100);
    }

    #[test]
    fn identity_for_ternary_labels() {
        let s: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let joint: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| if i == j { 0.2 } else { 0.0667 }).collect()).collect();
        let out = slepian_wolf_binning(&s, &s, &joint, 3f64.log2(), 4);
        assert!(!out.error);
        assert_eq!(out.bin.len(), 60);
    }

    #[test]
    fn perfect_side_information() {
        let (s, _) = draw(200, 0.0, 5);
        let out = slepian_wolf_binning(&s, &s, &dsbs_joint(0.0), 0.1, 7);
        assert!(!out.error);
    }

    #[test]
    fn decodes_with_margin() {
        let rate = binary_entropy(0.1) + 0.25;
        let errors = (0..20)
            .filter(|&i| {
                let (s, y) = draw(200, 0.1, 100 + i);
                slepian_wolf_binning(&s, &y, &dsbs_joint(0.1), rate, 1000 + i).error
            })
            .count();
        assert!(errors <= 6, "{errors} of 20 blocks failed");
    }

    #[test]
    fn decoded_sequence_lies_in_bin() {
        let (s, y) = draw(120, 0.15, 42);
        let out = slepian_wolf_binning(&s, &y, &dsbs_joint(0.15), 0.5, 43);
        let code = SwCode::for_rate(120, 2, 0.5, 43);
        assert_eq!(code.bin(&out.decoded), out.bin);
    }
}
