//! Finite-alphabet sources and exact information measures.
//!
//! All logarithms are base 2. Joint matrices are indexed `joint[x][y]`: rows
//! carry the variable being described, columns the conditioning variable.

use std::path::Path;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability sums.
pub const PROB_TOL: f64 = 1e-12;

/// `-p log2 p` with the `0 log 0 = 0` convention.
fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn check_pmf(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty pmf".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("negative or non-finite entry {p}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// A probability vector over an explicit finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    support: Vec<u64>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(support: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::AlphabetMismatch { expected: support.len(), actual: probs.len() });
        }
        check_pmf(&probs)?;
        Ok(Distribution { support, probs })
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of a support element, zero when absent.
    pub fn prob_of(&self, value: u64) -> f64 {
        self.support.iter().position(|&s| s == value).map_or(0.0, |i| self.probs[i])
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

/// A memoryless source `X ~ P(x)` on `{0, .., alphabet_size - 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceModel {
    pmf: Vec<f64>,
}

impl SourceModel {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        check_pmf(&pmf)?;
        Ok(SourceModel { pmf })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Self::new(vec![1.0 / size as f64; size])
    }

    pub fn point_mass(size: usize, symbol: usize) -> Result<Self> {
        if symbol >= size {
            return Err(Error::SymbolOutOfRange { symbol, size });
        }
        let mut pmf = vec![0.0; size];
        pmf[symbol] = 1.0;
        Self::new(pmf)
    }

    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.pmf[x]
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.pmf)
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution { support: (0..self.pmf.len() as u64).collect(), probs: self.pmf.clone() }
    }

    /// Probability of an i.i.d. sequence.
    pub fn sequence_prob(&self, xs: &[usize]) -> f64 {
        xs.iter().map(|&x| self.pmf[x]).product()
    }
}

/// Degraded triple `P(x) P(y|x) P(w|y)`: `Y` is the legitimate decoder's side
/// information, `W` the eavesdropper's.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSourceModel {
    px: SourceModel,
    py_given_x: Vec<Vec<f64>>,
    pw_given_y: Vec<Vec<f64>>,
}

fn check_stochastic(name: &str, rows: &[Vec<f64>], expected_rows: usize) -> Result<usize> {
    if rows.len() != expected_rows {
        return Err(Error::AlphabetMismatch { expected: expected_rows, actual: rows.len() });
    }
    let width = rows.first().map_or(0, Vec::len);
    for row in rows {
        if row.len() != width {
            return Err(Error::InvalidDistribution(format!("{name} is ragged")));
        }
        check_pmf(row).map_err(|e| Error::InvalidDistribution(format!("{name}: {e}")))?;
    }
    Ok(width)
}

impl JointSourceModel {
    pub fn new(px: SourceModel, py_given_x: Vec<Vec<f64>>, pw_given_y: Vec<Vec<f64>>) -> Result<Self> {
        let ny = check_stochastic("P(y|x)", &py_given_x, px.alphabet_size())?;
        check_stochastic("P(w|y)", &pw_given_y, ny)?;
        Ok(JointSourceModel { px, py_given_x, pw_given_y })
    }

    /// No side information: `Y` and `W` are constants.
    pub fn without_side_information(px: SourceModel) -> Self {
        let n = px.alphabet_size();
        JointSourceModel { px, py_given_x: vec![vec![1.0]; n], pw_given_y: vec![vec![1.0]] }
    }

    /// `Y` is `X` observed through a symmetric channel with the given error
    /// probability (uniform over the other symbols); `W` is constant.
    pub fn symmetric_channel(px: SourceModel, crossover: f64) -> Result<Self> {
        let py = symmetric_channel_matrix(px.alphabet_size(), crossover);
        let ny = py.len();
        Self::new(px, py, vec![vec![1.0]; ny])
    }

    pub fn px(&self) -> &SourceModel {
        &self.px
    }

    pub fn py_given_x(&self) -> &[Vec<f64>] {
        &self.py_given_x
    }

    pub fn pw_given_y(&self) -> &[Vec<f64>] {
        &self.pw_given_y
    }

    pub fn x_size(&self) -> usize {
        self.px.alphabet_size()
    }

    pub fn y_size(&self) -> usize {
        self.pw_given_y.len()
    }

    pub fn w_size(&self) -> usize {
        self.pw_given_y.first().map_or(0, Vec::len)
    }

    /// `P(x, y)` as `joint[x][y]`.
    pub fn joint_xy(&self) -> Vec<Vec<f64>> {
        self.py_given_x
            .iter()
            .enumerate()
            .map(|(x, row)| row.iter().map(|p| self.px.prob(x) * p).collect())
            .collect()
    }

    /// `P(w|x)` by chaining through `y`.
    pub fn pw_given_x(&self) -> Vec<Vec<f64>> {
        self.py_given_x
            .iter()
            .map(|row| {
                (0..self.w_size())
                    .map(|w| row.iter().zip(&self.pw_given_y).map(|(py, pw)| py * pw[w]).sum())
                    .collect()
            })
            .collect()
    }

    /// `P(w|x)` by summing the full triple `P(x,y,w)` and normalizing.
    pub fn pw_given_x_by_summation(&self) -> Vec<Vec<f64>> {
        let mut joint = vec![vec![0.0; self.w_size()]; self.x_size()];
        for x in 0..self.x_size() {
            for y in 0..self.y_size() {
                for w in 0..self.w_size() {
                    joint[x][w] += self.px.prob(x) * self.py_given_x[x][y] * self.pw_given_y[y][w];
                }
            }
        }
        joint
            .into_iter()
            .enumerate()
            .map(|(x, row)| {
                let px = self.px.prob(x);
                if px > 0.0 {
                    row.into_iter().map(|p| p / px).collect()
                } else {
                    // Undefined conditional; fall back to the chained value.
                    self.pw_given_x()[x].clone()
                }
            })
            .collect()
    }

    /// `P(x, w)` as `joint[x][w]`.
    pub fn joint_xw(&self) -> Vec<Vec<f64>> {
        self.pw_given_x()
            .iter()
            .enumerate()
            .map(|(x, row)| row.iter().map(|p| self.px.prob(x) * p).collect())
            .collect()
    }

    pub fn h_x(&self) -> f64 {
        self.px.entropy()
    }

    pub fn h_x_given_y(&self) -> f64 {
        conditional_entropy(&self.joint_xy())
    }

    pub fn h_x_given_w(&self) -> f64 {
        conditional_entropy(&self.joint_xw())
    }
}

/// Row-stochastic matrix of a `size`-ary symmetric channel.
pub fn symmetric_channel_matrix(size: usize, crossover: f64) -> Vec<Vec<f64>> {
    if size == 1 {
        return vec![vec![1.0]];
    }
    let off = crossover / (size - 1) as f64;
    (0..size)
        .map(|i| (0..size).map(|j| if i == j { 1.0 - crossover } else { off }).collect())
        .collect()
}

/// Shannon entropy in bits.
pub fn entropy(probs: &[f64]) -> f64 {
    // adding 0.0 turns the -0.0 of a point mass into 0.0
    probs.iter().copied().map(surprisal_term).sum::<f64>() + 0.0
}

/// Binary entropy function.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// `H(X|Y) = sum_y P(y) H(X|Y=y)` for `joint[x][y]`.
pub fn conditional_entropy(joint: &[Vec<f64>]) -> f64 {
    let ny = joint.first().map_or(0, Vec::len);
    (0..ny)
        .map(|y| {
            let py: f64 = joint.iter().map(|row| row[y]).sum();
            if py <= 0.0 {
                return 0.0;
            }
            let column: Vec<f64> = joint.iter().map(|row| row[y] / py).collect();
            py * entropy(&column)
        })
        .sum()
}

/// Column marginal of `joint[x][y]`.
pub fn column_marginal(joint: &[Vec<f64>]) -> Vec<f64> {
    let ny = joint.first().map_or(0, Vec::len);
    (0..ny).map(|y| joint.iter().map(|row| row[y]).sum()).collect()
}

/// Row marginal of `joint[x][y]`.
pub fn row_marginal(joint: &[Vec<f64>]) -> Vec<f64> {
    joint.iter().map(|row| row.iter().sum()).collect()
}

/// Total-variation distance, `(1/2) sum |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Bayes update of `prior` by per-symbol likelihoods. Symbols of zero prior
/// or zero likelihood get zero posterior. When the likelihood is the same for
/// every symbol in the prior's support the prior is returned unchanged, so
/// an uninformative observation leaves no rounding residue.
pub fn bayes_posterior(prior: &[f64], likelihood: &[f64]) -> Option<Vec<f64>> {
    let mut support = prior.iter().zip(likelihood).filter(|(p, _)| **p > 0.0).map(|(_, l)| *l);
    let first = support.next()?;
    if first > 0.0 && support.all(|l| l == first) {
        return Some(prior.to_vec());
    }
    let joint: Vec<f64> = prior.iter().zip(likelihood).map(|(p, l)| p * l).collect();
    let total: f64 = joint.iter().sum();
    (total > 0.0).then(|| joint.iter().map(|j| j / total).collect())
}

/// `n` i.i.d. draws, fully determined by `seed`.
pub fn sample(model: &SourceModel, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    sample_with(model, n, &mut rng)
}

pub fn sample_with<R: rand::Rng>(model: &SourceModel, n: usize, rng: &mut R) -> Vec<usize> {
    let dist = WeightedIndex::new(model.pmf()).expect("validated pmf has positive mass");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Draw `y_t ~ P(y|x_t)` for each source symbol.
pub fn sample_channel<R: rand::Rng>(rows: &[Vec<f64>], xs: &[usize], rng: &mut R) -> Vec<usize> {
    let dists: Vec<WeightedIndex<f64>> =
        rows.iter().map(|r| WeightedIndex::new(r).expect("stochastic row")).collect();
    xs.iter().map(|&x| dists[x].sample(rng)).collect()
}

/// On-disk source description: `{"pmf": [..], "py_given_x": [[..]], "pw_given_y": [[..]]}`.
/// The two channel matrices are optional and default to constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceConfig {
    pub pmf: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub py_given_x: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pw_given_y: Option<Vec<Vec<f64>>>,
}

impl SourceConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn has_side_information(&self) -> bool {
        self.py_given_x.is_some()
    }

    pub fn source(&self) -> Result<SourceModel> {
        SourceModel::new(self.pmf.clone())
    }

    pub fn joint(&self) -> Result<JointSourceModel> {
        let px = self.source()?;
        let py = self.py_given_x.clone().unwrap_or_else(|| vec![vec![1.0]; px.alphabet_size()]);
        let ny = py.first().map_or(0, Vec::len);
        let pw = self.pw_given_y.clone().unwrap_or_else(|| vec![vec![1.0]; ny]);
        JointSourceModel::new(px, py, pw)
    }
}
