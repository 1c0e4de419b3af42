//! Instantaneous (prefix) codes: Huffman construction, complete length
//! profiles, canonical realization and symbol-by-symbol parsing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::source_models::SourceModel;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct TrieNode {
    child: [usize; 2],
    leaf: usize,
}

/// A prefix-free map from symbols `0..k` to non-empty codewords.
#[derive(Clone)]
pub struct InstantaneousCode {
    codewords: Vec<Bits>,
    trie: Vec<TrieNode>,
}

impl InstantaneousCode {
    /// Validates prefix-freeness and positive lengths.
    pub fn new(codewords: Vec<Bits>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::InvalidDistribution("code over empty alphabet".into()));
        }
        let mut trie = vec![TrieNode { child: [NONE; 2], leaf: NONE }];
        for (symbol, word) in codewords.iter().enumerate() {
            if word.is_empty() {
                return Err(Error::Config(format!("codeword for symbol {symbol} is empty")));
            }
            let mut node = 0;
            for &bit in word.iter() {
                if trie[node].leaf != NONE {
                    return Err(Error::Config(format!("codeword of {} prefixes {symbol}", trie[node].leaf)));
                }
                let b = usize::from(bit);
                if trie[node].child[b] == NONE {
                    trie.push(TrieNode { child: [NONE; 2], leaf: NONE });
                    let id = trie.len() - 1;
                    trie[node].child[b] = id;
                }
                node = trie[node].child[b];
            }
            if trie[node].leaf != NONE || trie[node].child != [NONE; 2] {
                return Err(Error::Config(format!("codeword of symbol {symbol} is not prefix-free")));
            }
            trie[node].leaf = symbol;
        }
        Ok(InstantaneousCode { codewords, trie })
    }

    /// Canonical code for per-symbol lengths: symbols sorted by `(length,
    /// index)` receive consecutive codewords.
    pub fn canonical(lengths: &[usize]) -> Result<Self> {
        if lengths.iter().any(|&l| l == 0 || l > 63) {
            return Err(Error::Config("codeword lengths must lie in 1..=63".into()));
        }
        let max = *lengths.iter().max().ok_or_else(|| Error::Config("empty length list".into()))?;
        let kraft: u128 = lengths.iter().map(|&l| 1u128 << (max - l)).sum();
        if kraft > 1u128 << max {
            return Err(Error::Config("lengths violate Kraft's inequality".into()));
        }
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by_key(|&s| (lengths[s], s));
        let mut codewords = vec![Bits::new(); lengths.len()];
        let mut next: u64 = 0;
        let mut prev_len = lengths[order[0]];
        for &s in &order {
            next <<= lengths[s] - prev_len;
            prev_len = lengths[s];
            codewords[s] = Bits::from_uint(next, lengths[s]);
            next += 1;
        }
        Self::new(codewords)
    }

    /// Fixed-length code with `ceil(log2 k)` bits (at least one).
    pub fn fixed_length(alphabet_size: usize) -> Result<Self> {
        let width = ceil_log2(alphabet_size).max(1);
        Self::canonical(&vec![width; alphabet_size])
    }

    pub fn alphabet_size(&self) -> usize {
        self.codewords.len()
    }

    pub fn codeword(&self, symbol: usize) -> &Bits {
        &self.codewords[symbol]
    }

    pub fn codewords(&self) -> &[Bits] {
        &self.codewords
    }

    pub fn len_of(&self, symbol: usize) -> usize {
        self.codewords[symbol].len()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.codewords.iter().map(|c| c.len()).collect()
    }

    pub fn min_len(&self) -> usize {
        self.codewords.iter().map(|c| c.len()).min().unwrap_or(0)
    }

    pub fn max_len(&self) -> usize {
        self.codewords.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn kraft_sum(&self) -> f64 {
        self.codewords.iter().map(|c| 0.5f64.powi(c.len() as i32)).sum()
    }

    /// Kraft sum equals one, checked in integer arithmetic.
    pub fn is_complete(&self) -> bool {
        let max = self.max_len();
        self.codewords.iter().map(|c| 1u128 << (max - c.len())).sum::<u128>() == 1u128 << max
    }

    pub fn profile(&self) -> LengthProfile {
        LengthProfile::new(self.lengths())
    }

    /// Concatenated codewords of a symbol sequence.
    pub fn encode_seq(&self, symbols: &[usize]) -> Bits {
        let mut out = Bits::new();
        for &s in symbols {
            out.extend_from(&self.codewords[s]);
        }
        out
    }

    /// Parse the unique codeword at the head of `bits`.
    pub fn parse_prefix(&self, bits: &[bool]) -> Result<(usize, usize)> {
        let mut node = 0;
        for (i, &bit) in bits.iter().enumerate() {
            node = self.trie[node].child[usize::from(bit)];
            if node == NONE {
                return Err(Error::NoCodewordPrefix);
            }
            if self.trie[node].leaf != NONE {
                return Ok((self.trie[node].leaf, i + 1));
            }
        }
        Err(Error::NoCodewordPrefix)
    }

    /// Parse a concatenation of codewords completely.
    pub fn decode_all(&self, bits: &[bool]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < bits.len() {
            let (s, used) = self.parse_prefix(&bits[pos..])?;
            out.push(s);
            pos += used;
        }
        Ok(out)
    }

    /// One `symbol<TAB>bitstring` line per symbol.
    pub fn to_text(&self) -> String {
        self.codewords.iter().enumerate().map(|(s, c)| format!("{s}\t{c}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (sym, word) = line
                .split_once('\t')
                .ok_or_else(|| Error::Config(format!("expected symbol<TAB>bits, got {line:?}")))?;
            let sym: usize = sym.trim().parse().map_err(|_| Error::Config(format!("bad symbol {sym:?}")))?;
            entries.push((sym, word.trim().parse::<Bits>()?));
        }
        entries.sort_by_key(|(s, _)| *s);
        if entries.iter().enumerate().any(|(i, (s, _))| i != *s) {
            return Err(Error::Config("symbols must be exactly 0..k".into()));
        }
        Self::new(entries.into_iter().map(|(_, w)| w).collect())
    }
}

impl fmt::Debug for InstantaneousCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.codewords.iter().enumerate().map(|(s, c)| (s, c.to_string()))).finish()
    }
}

impl PartialEq for InstantaneousCode {
    fn eq(&self, other: &Self) -> bool {
        self.codewords == other.codewords
    }
}

/// A multiset of codeword lengths, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LengthProfile {
    lengths: Vec<usize>,
}

impl LengthProfile {
    pub fn new(mut lengths: Vec<usize>) -> Self {
        lengths.sort_unstable();
        LengthProfile { lengths }
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn max_len(&self) -> usize {
        self.lengths.last().copied().unwrap_or(0)
    }

    /// `sum 2^-l == 1` in integer arithmetic.
    pub fn is_complete(&self) -> bool {
        let max = self.max_len();
        self.lengths.iter().map(|&l| 1u128 << (max - l)).sum::<u128>() == 1u128 << max
    }

    /// Per-symbol lengths minimizing expected length for this multiset: the
    /// most probable symbols (ties by index) get the shortest lengths.
    pub fn assign(&self, model: &SourceModel) -> Result<Vec<usize>> {
        if model.alphabet_size() != self.lengths.len() {
            return Err(Error::AlphabetMismatch { expected: self.lengths.len(), actual: model.alphabet_size() });
        }
        let mut order: Vec<usize> = (0..self.lengths.len()).collect();
        order.sort_by(|&a, &b| model.prob(b).total_cmp(&model.prob(a)).then(a.cmp(&b)));
        let mut per_symbol = vec![0; self.lengths.len()];
        for (rank, &s) in order.iter().enumerate() {
            per_symbol[s] = self.lengths[rank];
        }
        Ok(per_symbol)
    }

    /// Canonical prefix code realizing the best assignment for `model`.
    pub fn realize(&self, model: &SourceModel) -> Result<InstantaneousCode> {
        InstantaneousCode::canonical(&self.assign(model)?)
    }
}

impl fmt::Display for LengthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lengths.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("-"))
    }
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Debug)]
struct HeapItem {
    prob: f64,
    min_symbol: usize,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    // Reversed: BinaryHeap is a max-heap and we pop the lightest node,
    // lowest symbol index first on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other.prob.total_cmp(&self.prob).then(other.min_symbol.cmp(&self.min_symbol))
    }
}

/// Huffman code for `model`. Ties merge the lowest symbol index first and
/// the sibling holding the lower index takes bit `0`. A one-symbol alphabet
/// gets the codeword `0`.
pub fn build_huffman(model: &SourceModel) -> InstantaneousCode {
    let k = model.alphabet_size();
    if k == 1 {
        return InstantaneousCode::new(vec![Bits::from(vec![false])]).expect("single codeword");
    }
    // children[node] for internal nodes; leaves are 0..k
    let mut children: Vec<[usize; 2]> = vec![[NONE; 2]; k];
    let mut heap: BinaryHeap<HeapItem> =
        (0..k).map(|s| HeapItem { prob: model.prob(s), min_symbol: s, node: s }).collect();
    while heap.len() > 1 {
        let a = heap.pop().expect("two nodes");
        let b = heap.pop().expect("two nodes");
        let (zero, one) = if a.min_symbol < b.min_symbol { (a, b) } else { (b, a) };
        children.push([zero.node, one.node]);
        heap.push(HeapItem {
            prob: zero.prob + one.prob,
            min_symbol: zero.min_symbol,
            node: children.len() - 1,
        });
    }
    let root = heap.pop().expect("root").node;
    let mut codewords = vec![Bits::new(); k];
    let mut stack = vec![(root, Bits::new())];
    while let Some((node, prefix)) = stack.pop() {
        if node < k {
            codewords[node] = prefix;
            continue;
        }
        for (bit, &child) in children[node].iter().enumerate() {
            let mut p = prefix.clone();
            p.push(bit == 1);
            stack.push((child, p));
        }
    }
    InstantaneousCode::new(codewords).expect("huffman tree is prefix-free")
}

/// `sum_x P(x) |c(x)|`.
pub fn expected_length(code: &InstantaneousCode, model: &SourceModel) -> Result<f64> {
    if code.alphabet_size() != model.alphabet_size() {
        return Err(Error::AlphabetMismatch { expected: code.alphabet_size(), actual: model.alphabet_size() });
    }
    Ok(model.pmf().iter().zip(code.codewords()).map(|(p, c)| p * c.len() as f64).sum())
}

/// Huffman length `L(X)`, the optimum over codes for the support of `X`.
/// Zero-probability symbols never occur and take no codeword space.
pub fn huffman_length(model: &SourceModel) -> f64 {
    let support: Vec<f64> = model.pmf().iter().copied().filter(|&p| p > 0.0).collect();
    let restricted = SourceModel::new(support).expect("support of a valid pmf");
    expected_length(&build_huffman(&restricted), &restricted).expect("same alphabet")
}

/// `L(X|Y) = sum_y P(y) L(X|Y=y)` for `joint[x][y]`.
pub fn conditional_huffman_length(joint: &[Vec<f64>]) -> Result<f64> {
    let ny = joint.first().map_or(0, Vec::len);
    let mut total = 0.0;
    for y in 0..ny {
        let py: f64 = joint.iter().map(|row| row[y]).sum();
        if py <= 0.0 {
            continue;
        }
        let conditional = SourceModel::new(joint.iter().map(|row| row[y] / py).collect())
            .or_else(|_| {
                // renormalize away rounding drift
                let col: Vec<f64> = joint.iter().map(|row| row[y]).collect();
                let s: f64 = col.iter().sum();
                SourceModel::new(col.iter().map(|p| p / s).collect())
            })?;
        total += py * huffman_length(&conditional);
    }
    Ok(total)
}

/// Every multiset of `alphabet_size` lengths whose Kraft sum is exactly one,
/// lengths bounded by `alphabet_size - 1`. Sorted lexicographically. A
/// one-symbol alphabet has the single profile `{1}`.
pub fn enumerate_complete_profiles(alphabet_size: usize) -> Vec<LengthProfile> {
    if alphabet_size <= 1 {
        return vec![LengthProfile::new(vec![1; alphabet_size.max(1)])];
    }
    let max_len = alphabet_size - 1;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(alphabet_size);
    // Kraft budget measured in units of 2^-max_len.
    fill_profiles(alphabet_size, max_len, 1, 1u128 << max_len, &mut current, &mut out);
    out
}

fn fill_profiles(
    remaining: usize,
    max_len: usize,
    min_next: usize,
    budget: u128,
    current: &mut Vec<usize>,
    out: &mut Vec<LengthProfile>,
) {
    if remaining == 0 {
        if budget == 0 {
            out.push(LengthProfile { lengths: current.clone() });
        }
        return;
    }
    for len in min_next..=max_len {
        let weight = 1u128 << (max_len - len);
        // every later length is >= len, so each uses at most `weight`
        if weight * (remaining as u128) < budget {
            break;
        }
        if weight + (remaining as u128 - 1) > budget {
            continue;
        }
        current.push(len);
        fill_profiles(remaining - 1, max_len, len, budget - weight, current, out);
        current.pop();
    }
}

impl serde::Serialize for LengthProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    fn model(p: &[f64]) -> SourceModel {
        SourceModel::new(p.to_vec()).unwrap()
    }

    fn abc() -> InstantaneousCode {
        InstantaneousCode::new(vec![bits("0"), bits("10"), bits("11")]).unwrap()
    }

    #[test]
    fn huffman_examples() {
        let m = model(&[0.5, 0.25, 0.25]);
        let c = build_huffman(&m);
        assert_eq!(c.lengths(), vec![1, 2, 2]);
        assert_eq!(expected_length(&c, &m).unwrap(), 1.5);

        let u = SourceModel::uniform(4).unwrap();
        assert_eq!(build_huffman(&u).lengths(), vec![2; 4]);

        let m = model(&[0.4, 0.3, 0.2, 0.1]);
        let c = build_huffman(&m);
        assert_eq!(c.lengths(), vec![1, 2, 3, 3]);
        assert!((expected_length(&c, &m).unwrap() - 1.9).abs() < 1e-12);
        assert!(c.is_complete());
    }

    #[test]
    fn huffman_is_deterministic_on_ties() {
        let u = SourceModel::uniform(4).unwrap();
        let c = build_huffman(&u);
        assert_eq!(c, build_huffman(&u));
        assert_eq!(c.codeword(0), &bits("00"));
    }

    #[test]
    fn single_symbol_gets_length_one() {
        let c = build_huffman(&SourceModel::uniform(1).unwrap());
        assert_eq!(c.lengths(), vec![1]);
    }

    #[test]
    fn expected_length_examples() {
        let fixed = InstantaneousCode::fixed_length(4).unwrap();
        let m = model(&[0.4, 0.3, 0.2, 0.1]);
        assert!((expected_length(&fixed, &m).unwrap() - 2.0).abs() < 1e-12);
        assert!(expected_length(&fixed, &m).unwrap() >= huffman_length(&m));
        assert!(matches!(
            expected_length(&fixed, &model(&[0.5, 0.5])),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn conditional_huffman_examples() {
        // X uniform over 4 independent of a fair Y
        let indep: Vec<Vec<f64>> = (0..4).map(|_| vec![0.125, 0.125]).collect();
        assert!((conditional_huffman_length(&indep).unwrap() - 2.0).abs() < 1e-12);
        // Y = X: every conditional is a point mass, length 1
        let diag: Vec<Vec<f64>> = (0..3).map(|x| (0..3).map(|y| if x == y { 1.0 / 3.0 } else { 0.0 }).collect()).collect();
        assert!((conditional_huffman_length(&diag).unwrap() - 1.0).abs() < 1e-12);
        // Y = 1{X in {0,1}}
        let ind = vec![vec![0.25, 0.0], vec![0.25, 0.0], vec![0.0, 0.25], vec![0.0, 0.25]];
        let l = conditional_huffman_length(&ind).unwrap();
        assert!((l - 1.0).abs() < 1e-12, "{l}");
        assert!(l <= huffman_length(&SourceModel::uniform(4).unwrap()));
    }

    #[test]
    fn complete_profiles_small() {
        let p = |v: &[usize]| LengthProfile::new(v.to_vec());
        assert_eq!(enumerate_complete_profiles(2), vec![p(&[1, 1])]);
        assert_eq!(enumerate_complete_profiles(3), vec![p(&[1, 2, 2])]);
        assert_eq!(enumerate_complete_profiles(4), vec![p(&[1, 2, 3, 3]), p(&[2, 2, 2, 2])]);
        for k in 2..=9 {
            for prof in enumerate_complete_profiles(k) {
                assert!(prof.is_complete());
                assert_eq!(prof.lengths().len(), k);
            }
        }
    }

    #[test]
    fn parse_examples() {
        let c = abc();
        assert_eq!(c.parse_prefix(&bits("1101")).unwrap(), (2, 2));
        assert_eq!(c.parse_prefix(&bits("0")).unwrap(), (0, 1));
        assert!(matches!(c.parse_prefix(&bits("1")), Err(Error::NoCodewordPrefix)));
        assert!(matches!(c.parse_prefix(&[]), Err(Error::NoCodewordPrefix)));
    }

    #[test]
    fn rejects_non_prefix_free() {
        assert!(InstantaneousCode::new(vec![bits("0"), bits("01")]).is_err());
        assert!(InstantaneousCode::new(vec![bits("01"), bits("0")]).is_err());
        assert!(InstantaneousCode::new(vec![bits("1"), bits("1")]).is_err());
        assert!(InstantaneousCode::new(vec![bits("")]).is_err());
        assert!(InstantaneousCode::canonical(&[1, 1, 1]).is_err());
    }

    #[test]
    fn canonical_realization() {
        let prof = LengthProfile::new(vec![3, 1, 3, 2]);
        let m = model(&[0.1, 0.2, 0.3, 0.4]);
        let c = prof.realize(&m).unwrap();
        assert_eq!(c.lengths(), vec![3, 3, 2, 1]);
        assert_eq!(c.codeword(3), &bits("0"));
        assert_eq!(c.codeword(2), &bits("10"));
        assert_eq!(c.codeword(0), &bits("110"));
        assert_eq!(c.codeword(1), &bits("111"));
    }

    #[test]
    fn text_format() {
        let c = abc();
        let text = c.to_text();
        assert_eq!(text, "0\t0\n1\t10\n2\t11\n");
        assert_eq!(InstantaneousCode::from_text(&text).unwrap(), c);
        assert!(InstantaneousCode::from_text("0\t0\n2\t1\n").is_err());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }
}
