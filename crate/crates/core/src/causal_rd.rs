//! Causal rate-distortion by exhaustive search over deterministic scalar
//! quantizers, with and without decoder side information, and membership
//! tests for the secrecy regions built on their lower convex envelopes.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{Envelope, EnvelopeValue, HULL_TOL};
use crate::source_models::{conditional_entropy, entropy, JointSourceModel, SourceModel};

/// Default cap on the number of enumerated quantizers.
pub const DEFAULT_QUANTIZER_LIMIT: u128 = 1_000_000;

/// Slack below which a region inequality counts as satisfied (and binding).
pub const REGION_TOL: f64 = 1e-9;

/// `d(x, x_hat)` as a `|X| x |X_hat|` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionMatrix {
    rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DistortionFile {
    Bare(Vec<Vec<f64>>),
    Wrapped { distortion: Vec<Vec<f64>> },
}

impl DistortionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || width == 0 {
            return Err(Error::Config("distortion matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Config("distortion matrix rows differ in length".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("distortions must be finite and non-negative".into()));
        }
        Ok(DistortionMatrix { rows })
    }

    pub fn hamming(size: usize) -> Self {
        DistortionMatrix {
            rows: (0..size).map(|i| (0..size).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect(),
        }
    }

    /// Accepts a bare JSON matrix or `{"distortion": [[..]]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        match serde_json::from_str::<DistortionFile>(s)? {
            DistortionFile::Bare(rows) | DistortionFile::Wrapped { distortion: rows } => Self::new(rows),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn source_size(&self) -> usize {
        self.rows.len()
    }

    pub fn reproduction_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, x: usize, x_hat: usize) -> f64 {
        self.rows[x][x_hat]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    fn check_source(&self, size: usize) -> Result<()> {
        if self.source_size() != size {
            return Err(Error::AlphabetMismatch { expected: size, actual: self.source_size() });
        }
        Ok(())
    }
}

/// A deterministic map `X -> X_hat`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quantizer {
    map: Vec<usize>,
}

impl Quantizer {
    pub fn new(map: Vec<usize>, reproduction_size: usize) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&v| v >= reproduction_size) {
            return Err(Error::SymbolOutOfRange { symbol: bad, size: reproduction_size });
        }
        Ok(Quantizer { map })
    }

    pub fn identity(size: usize) -> Self {
        Quantizer { map: (0..size).collect() }
    }

    pub fn constant(size: usize, value: usize) -> Self {
        Quantizer { map: vec![value; size] }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn expected_distortion(&self, model: &SourceModel, d: &DistortionMatrix) -> f64 {
        (0..model.alphabet_size()).map(|x| model.prob(x) * d.get(x, self.map[x])).sum()
    }

    /// Pmf of `f(X)` over `0..=max(f)`.
    pub fn output_pmf(&self, model: &SourceModel) -> Vec<f64> {
        let size = self.map.iter().max().map_or(0, |m| m + 1);
        let mut pmf = vec![0.0; size];
        for (x, &s) in self.map.iter().enumerate() {
            pmf[s] += model.prob(x);
        }
        pmf
    }

    /// `H(f(X))`.
    pub fn output_entropy(&self, model: &SourceModel) -> f64 {
        entropy(&self.output_pmf(model))
    }
}

impl fmt::Display for Quantizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.map)
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, v: &[usize]) -> fmt::Result {
    write!(f, "[")?;
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "]")
}

/// Encoder `f: X -> S` and decoder `g: (S, Y) -> X_hat`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SIQuantizerPair {
    f: Vec<usize>,
    messages: usize,
    /// `g[s][y]`.
    g: Vec<Vec<usize>>,
}

impl SIQuantizerPair {
    pub fn new(f: Vec<usize>, g: Vec<Vec<usize>>) -> Result<Self> {
        let messages = g.len();
        if messages == 0 || messages > f.len() {
            return Err(Error::Config(format!("message alphabet size {messages} must lie in 1..={}", f.len())));
        }
        if let Some(&bad) = f.iter().find(|&&s| s >= messages) {
            return Err(Error::SymbolOutOfRange { symbol: bad, size: messages });
        }
        if g.iter().any(|row| row.len() != g[0].len()) {
            return Err(Error::Config("decoder table rows differ in length".into()));
        }
        Ok(SIQuantizerPair { f, messages, g })
    }

    pub fn f(&self) -> &[usize] {
        &self.f
    }

    pub fn g(&self) -> &[Vec<usize>] {
        &self.g
    }

    pub fn message_size(&self) -> usize {
        self.messages
    }

    pub fn encode(&self, x: usize) -> usize {
        self.f[x]
    }

    pub fn decode(&self, s: usize, y: usize) -> usize {
        self.g[s][y]
    }

    /// `E d(X, g(f(X), Y))`.
    pub fn expected_distortion(&self, joint: &JointSourceModel, d: &DistortionMatrix) -> f64 {
        let pxy = joint.joint_xy();
        let mut total = 0.0;
        for (x, row) in pxy.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                total += p * d.get(x, self.g[self.f[x]][y]);
            }
        }
        total
    }

    /// `P(s, y)`.
    pub fn message_joint(&self, joint: &JointSourceModel) -> Vec<Vec<f64>> {
        let pxy = joint.joint_xy();
        let mut out = vec![vec![0.0; joint.y_size()]; self.messages];
        for (x, row) in pxy.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                out[self.f[x]][y] += p;
            }
        }
        out
    }

    /// `H(f(X) | Y)`.
    pub fn conditional_rate(&self, joint: &JointSourceModel) -> f64 {
        conditional_entropy(&self.message_joint(joint))
    }

    pub fn f_string(&self) -> String {
        Quantizer { map: self.f.clone() }.to_string()
    }

    pub fn g_string(&self) -> String {
        let rows: Vec<String> = self.g.iter().map(|r| Quantizer { map: r.clone() }.to_string()).collect();
        format!("[{}]", rows.join(" "))
    }
}

/// An achievable `(D, rate)` pair with the quantizer attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint<W> {
    pub distortion: f64,
    pub rate: f64,
    pub witness: W,
}

/// Time-sharing of two frontier witnesses: `first` on a fraction `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeShare<W> {
    pub first: RdPoint<W>,
    pub second: RdPoint<W>,
    pub lambda: f64,
}

impl<W> TimeShare<W> {
    pub fn distortion(&self) -> f64 {
        self.lambda * self.first.distortion + (1.0 - self.lambda) * self.second.distortion
    }

    pub fn rate(&self) -> f64 {
        self.lambda * self.first.rate + (1.0 - self.lambda) * self.second.rate
    }
}

impl<W: fmt::Display> fmt::Display for TimeShare<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lambda >= 1.0 {
            write!(f, "{}", self.first.witness)
        } else {
            write!(f, "{}*{}+{}*{}", self.first.witness, self.lambda, self.second.witness, 1.0 - self.lambda)
        }
    }
}

/// Pareto frontier of enumerated `(D, rate)` pairs and its lower convex
/// envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct RdCurve<W> {
    points: Vec<RdPoint<W>>,
    envelope: Envelope,
}

impl<W: Clone> RdCurve<W> {
    fn from_frontier(points: Vec<RdPoint<W>>) -> Self {
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.distortion, p.rate)).collect();
        let envelope = Envelope::from_points(&xy);
        RdCurve { points, envelope }
    }

    /// Frontier sorted by increasing distortion (and decreasing rate).
    pub fn points(&self) -> &[RdPoint<W>] {
        &self.points
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// Smallest achievable distortion.
    pub fn min_distortion(&self) -> f64 {
        self.points[0].distortion
    }

    /// The lower convex envelope at `d`.
    pub fn envelope_at(&self, d: f64) -> EnvelopeValue {
        self.envelope.eval(d)
    }

    /// The unconvexified curve: least rate of a single quantizer meeting `d`.
    pub fn staircase_at(&self, d: f64) -> Option<&RdPoint<W>> {
        self.points.iter().filter(|p| p.distortion <= d + HULL_TOL).last()
    }

    /// The two-quantizer mixture attaining the envelope at `d`.
    pub fn time_share(&self, d: f64) -> Option<TimeShare<W>> {
        let mix = self.envelope.mix_at(d)?;
        Some(TimeShare {
            first: self.points[mix.left.source].clone(),
            second: self.points[mix.right.source].clone(),
            lambda: mix.weight_left,
        })
    }
}

fn check_limit(required: u128, limit: u128) -> Result<()> {
    if required > limit {
        return Err(Error::StateSpaceTooLarge { required, limit });
    }
    Ok(())
}

fn frontier<W: Clone>(candidates: Vec<RdPoint<W>>) -> RdCurve<W> {
    let xy: Vec<(f64, f64)> = candidates.iter().map(|p| (p.distortion, p.rate)).collect();
    let keep = crate::hull::pareto_indices(&xy);
    RdCurve::from_frontier(keep.into_iter().map(|i| candidates[i].clone()).collect())
}

fn decode_map(mut index: u128, base: usize, len: usize) -> Vec<usize> {
    let mut map = vec![0; len];
    for slot in map.iter_mut().rev() {
        *slot = (index % base as u128) as usize;
        index /= base as u128;
    }
    map
}

/// `r_c(D)`: every map `X -> X_hat` is evaluated.
pub fn rc_curve(model: &SourceModel, d: &DistortionMatrix) -> Result<RdCurve<Quantizer>> {
    rc_curve_with_limit(model, d, DEFAULT_QUANTIZER_LIMIT)
}

pub fn rc_curve_with_limit(model: &SourceModel, d: &DistortionMatrix, limit: u128) -> Result<RdCurve<Quantizer>> {
    d.check_source(model.alphabet_size())?;
    let k = model.alphabet_size();
    let base = d.reproduction_size();
    let count = (base as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    check_limit(count, limit)?;
    let candidates: Vec<RdPoint<Quantizer>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let q = Quantizer { map: decode_map(i as u128, base, k) };
            RdPoint { distortion: q.expected_distortion(model, d), rate: q.output_entropy(model), witness: q }
        })
        .collect();
    Ok(frontier(candidates))
}

/// Restricted growth strings of length `n`: one per set partition.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = if prefix.is_empty() { 0 } else { max + 1 };
        for v in 0..=next {
            prefix.push(v);
            grow(prefix, max.max(v), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        grow(&mut Vec::with_capacity(n), 0, n, &mut out);
    }
    out
}

fn bell_number(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().expect("non-empty")];
        for v in &row {
            let s = next.last().expect("non-empty").saturating_add(*v);
            next.push(s);
        }
        row = next;
    }
    row[0]
}

/// Best decoder for a fixed encoder partition: for each `(s, y)` the
/// reproduction minimizing the conditional expected distortion (lowest index
/// on ties).
fn best_decoder(f: &[usize], messages: usize, pxy: &[Vec<f64>], d: &DistortionMatrix) -> Vec<Vec<usize>> {
    let ny = pxy.first().map_or(0, Vec::len);
    (0..messages)
        .map(|s| {
            (0..ny)
                .map(|y| {
                    let cost = |xh: usize| -> f64 {
                        (0..f.len()).filter(|&x| f[x] == s).map(|x| pxy[x][y] * d.get(x, xh)).sum()
                    };
                    (0..d.reproduction_size())
                        .map(|xh| (xh, cost(xh)))
                        .fold((0, f64::INFINITY), |best, (xh, c)| if c < best.1 - HULL_TOL { (xh, c) } else { best })
                        .0
                })
                .collect()
        })
        .collect()
}

/// `r_c^SI(D)`: encoders range over all partitions of `X` (every message
/// alphabet size up to `|X|`); for each, the distortion-optimal decoder.
pub fn rc_si_curve(joint: &JointSourceModel, d: &DistortionMatrix) -> Result<RdCurve<SIQuantizerPair>> {
    rc_si_curve_with_limit(joint, d, DEFAULT_QUANTIZER_LIMIT)
}

pub fn rc_si_curve_with_limit(joint: &JointSourceModel, d: &DistortionMatrix, limit: u128) -> Result<RdCurve<SIQuantizerPair>> {
    d.check_source(joint.x_size())?;
    check_limit(bell_number(joint.x_size()).saturating_mul(joint.y_size() as u128), limit)?;
    let pxy = joint.joint_xy();
    let candidates: Vec<RdPoint<SIQuantizerPair>> = set_partitions(joint.x_size())
        .into_par_iter()
        .map(|f| {
            let messages = f.iter().max().map_or(0, |m| m + 1);
            let g = best_decoder(&f, messages, &pxy, d);
            let pair = SIQuantizerPair { f, messages, g };
            RdPoint { distortion: pair.expected_distortion(joint, d), rate: pair.conditional_rate(joint), witness: pair }
        })
        .collect();
    Ok(frontier(candidates))
}

/// A candidate `(R, R_k, D, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub r: f64,
    pub r_k: f64,
    pub d: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Constraint {
    NonNegative,
    Distortion,
    Rate,
    Equivocation,
    KeyRate,
}

/// Membership verdict with per-inequality slack (positive = satisfied).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub member: bool,
    /// `r_c(D)` envelope value, or `None` below the least distortion.
    pub rate_bound: Option<f64>,
    /// `H(X)` or `H(X|W)`.
    pub entropy_bound: f64,
    /// Least admissible key rate, `None` when `D` is infeasible.
    pub key_threshold: Option<f64>,
    pub rate_slack: Option<f64>,
    pub equivocation_slack: f64,
    pub key_slack: Option<f64>,
    /// `h - H + r_c(D) <= 0`: the target equivocation needs no key.
    pub no_encryption: bool,
    pub binding: Vec<Constraint>,
    pub violated: Vec<Constraint>,
}

impl RegionReport {
    pub fn explain(&self) -> String {
        let mut parts = Vec::new();
        for c in &self.violated {
            parts.push(match c {
                Constraint::NonNegative => "all coordinates must be non-negative".to_string(),
                Constraint::Distortion => "D is below the least achievable distortion".to_string(),
                Constraint::Rate => format!("R >= {:.6}", self.rate_bound.unwrap_or(f64::NAN)),
                Constraint::Equivocation => format!("h <= {:.6}", self.entropy_bound),
                Constraint::KeyRate => format!("R_k >= {:.6}", self.key_threshold.unwrap_or(f64::NAN)),
            });
        }
        if parts.is_empty() {
            "member".into()
        } else {
            format!("violates {}", parts.join(", "))
        }
    }
}

fn evaluate(q: &Quadruple, rate_bound: EnvelopeValue, entropy_bound: f64) -> RegionReport {
    let mut violated = Vec::new();
    let mut binding = Vec::new();
    if [q.r, q.r_k, q.d, q.h].iter().any(|v| !(*v >= 0.0)) {
        violated.push(Constraint::NonNegative);
    }
    let equivocation_slack = entropy_bound - q.h;
    if equivocation_slack < -REGION_TOL {
        violated.push(Constraint::Equivocation);
    } else if equivocation_slack <= REGION_TOL {
        binding.push(Constraint::Equivocation);
    }
    let rate_bound = rate_bound.feasible();
    let (mut rate_slack, mut key_slack, mut key_threshold, mut no_encryption) = (None, None, None, false);
    match rate_bound {
        None => violated.push(Constraint::Distortion),
        Some(rb) => {
            let rs = q.r - rb;
            let raw = q.h - entropy_bound + rb;
            no_encryption = raw <= REGION_TOL;
            let threshold = raw.max(0.0);
            let ks = q.r_k - threshold;
            for (slack, c) in [(rs, Constraint::Rate), (ks, Constraint::KeyRate)] {
                if slack < -REGION_TOL {
                    violated.push(c);
                } else if slack <= REGION_TOL {
                    binding.push(c);
                }
            }
            rate_slack = Some(rs);
            key_slack = Some(ks);
            key_threshold = Some(threshold);
        }
    }
    RegionReport {
        member: violated.is_empty(),
        rate_bound,
        entropy_bound,
        key_threshold,
        rate_slack,
        equivocation_slack,
        key_slack,
        no_encryption,
        binding,
        violated,
    }
}

/// The region without side information, with its quantizer curve cached.
#[derive(Debug, Clone)]
pub struct NoSiRegion {
    h_x: f64,
    curve: RdCurve<Quantizer>,
}

impl NoSiRegion {
    pub fn new(model: &SourceModel, d: &DistortionMatrix) -> Result<Self> {
        Ok(NoSiRegion { h_x: model.entropy(), curve: rc_curve(model, d)? })
    }

    pub fn curve(&self) -> &RdCurve<Quantizer> {
        &self.curve
    }

    /// `R >= r_c(D)`, `h <= H(X)`, `R_k >= h - H(X) + r_c(D)`.
    pub fn check(&self, q: &Quadruple) -> RegionReport {
        evaluate(q, self.curve.envelope_at(q.d), self.h_x)
    }
}

/// The region with decoder side information `Y` and eavesdropper side
/// information `W`.
#[derive(Debug, Clone)]
pub struct SiRegion {
    h_x_given_w: f64,
    curve: RdCurve<SIQuantizerPair>,
}

impl SiRegion {
    pub fn new(joint: &JointSourceModel, d: &DistortionMatrix) -> Result<Self> {
        Ok(SiRegion { h_x_given_w: joint.h_x_given_w(), curve: rc_si_curve(joint, d)? })
    }

    pub fn curve(&self) -> &RdCurve<SIQuantizerPair> {
        &self.curve
    }

    /// `R >= r_c^SI(D)`, `h <= H(X|W)`, `R_k >= max(0, h - H(X|W) + r_c^SI(D))`.
    pub fn check(&self, q: &Quadruple) -> RegionReport {
        evaluate(q, self.curve.envelope_at(q.d), self.h_x_given_w)
    }
}

pub fn region_check_no_si(model: &SourceModel, d: &DistortionMatrix, q: &Quadruple) -> Result<RegionReport> {
    Ok(NoSiRegion::new(model, d)?.check(q))
}

pub fn region_check_si(joint: &JointSourceModel, d: &DistortionMatrix, q: &Quadruple) -> Result<RegionReport> {
    Ok(SiRegion::new(joint, d)?.check(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source_models::binary_entropy;

    fn skewed() -> SourceModel {
        SourceModel::new(vec![0.75, 0.25]).unwrap()
    }

    #[test]
    fn binary_frontier() {
        let c = rc_curve(&skewed(), &DistortionMatrix::hamming(2)).unwrap();
        let pts: Vec<(f64, f64)> = c.points().iter().map(|p| (p.distortion, p.rate)).collect();
        assert_eq!(pts.len(), 2);
        assert!(pts[0].0.abs() < 1e-15 && (pts[0].1 - binary_entropy(0.25)).abs() < 1e-12);
        assert!((pts[1].0 - 0.25).abs() < 1e-15 && pts[1].1.abs() < 1e-15);
        let v = c.envelope_at(0.125).feasible().unwrap();
        assert!((v - 0.405639062229566).abs() < 1e-9);
        assert_eq!(c.points()[0].witness, Quantizer::identity(2));
        assert_eq!(c.points()[1].witness, Quantizer::constant(2, 0));
        assert_eq!(c.envelope_at(-0.01), EnvelopeValue::Infeasible);
        assert_eq!(c.envelope_at(0.6), EnvelopeValue::Feasible(0.0));
    }

    #[test]
    fn time_share_witness() {
        let c = rc_curve(&skewed(), &DistortionMatrix::hamming(2)).unwrap();
        let ts = c.time_share(0.125).unwrap();
        assert!((ts.lambda - 0.5).abs() < 1e-12);
        assert!((ts.distortion() - 0.125).abs() < 1e-12);
        assert_eq!(ts.to_string(), "[0 1]*0.5+[0 0]*0.5");
    }

    #[test]
    fn staircase_vs_envelope() {
        let c = rc_curve(&skewed(), &DistortionMatrix::hamming(2)).unwrap();
        assert!((c.staircase_at(0.2).unwrap().rate - binary_entropy(0.25)).abs() < 1e-12);
        assert!(c.envelope_at(0.2).feasible().unwrap() < c.staircase_at(0.2).unwrap().rate);
    }

    #[test]
    fn partitions_are_bell_numbers() {
        for (n, b) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            assert_eq!(set_partitions(n).len(), b);
            assert_eq!(bell_number(n), b as u128);
        }
    }

    #[test]
    fn perfect_side_information_is_free() {
        let j = JointSourceModel::new(skewed(), vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0], vec![1.0]]).unwrap();
        let c = rc_si_curve(&j, &DistortionMatrix::hamming(2)).unwrap();
        assert_eq!(c.envelope_at(0.0), EnvelopeValue::Feasible(0.0));
        assert_eq!(c.points().len(), 1);
    }

    #[test]
    fn dsbs_lossless_rate() {
        let j = JointSourceModel::symmetric_channel(SourceModel::uniform(2).unwrap(), 0.1).unwrap();
        let c = rc_si_curve(&j, &DistortionMatrix::hamming(2)).unwrap();
        let v = c.envelope_at(0.0).feasible().unwrap();
        assert!((v - 0.4689955935892813).abs() < 1e-12);
    }

    #[test]
    fn quantizer_limit() {
        let m = SourceModel::uniform(8).unwrap();
        assert!(matches!(
            rc_curve_with_limit(&m, &DistortionMatrix::hamming(8), 1000),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn distortion_file_formats() {
        let a = DistortionMatrix::from_json_str("[[0,1],[1,0]]").unwrap();
        let b = DistortionMatrix::from_json_str(r#"{"distortion": [[0,1],[1,0]]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, DistortionMatrix::hamming(2));
        assert!(DistortionMatrix::from_json_str("[[0,-1],[1,0]]").is_err());
    }

    #[test]
    fn no_si_region_examples() {
        let region = NoSiRegion::new(&skewed(), &DistortionMatrix::hamming(2)).unwrap();
        let h = binary_entropy(0.25);
        let rb = region.curve().envelope_at(0.125).feasible().unwrap();
        let tight = region.check(&Quadruple { r: rb, r_k: rb, d: 0.125, h });
        assert!(tight.member);
        assert_eq!(tight.binding, vec![Constraint::Equivocation, Constraint::Rate, Constraint::KeyRate]);
        let over = region.check(&Quadruple { r: 1.0, r_k: 1.0, d: 0.125, h: h + 0.1 });
        assert!(!over.member);
        assert_eq!(over.violated, vec![Constraint::Equivocation]);
        let below = region.check(&Quadruple { r: 0.4, r_k: 1.0, d: 0.125, h: 0.5 });
        assert_eq!(below.violated, vec![Constraint::Rate]);
        let infeasible = region.check(&Quadruple { r: 1.0, r_k: 1.0, d: -0.01, h: 0.5 });
        assert!(infeasible.violated.contains(&Constraint::Distortion));
        assert_eq!(infeasible.rate_bound, None);
    }

    #[test]
    fn si_no_encryption_clause() {
        let px = SourceModel::uniform(2).unwrap();
        let j = JointSourceModel::new(
            px,
            crate::source_models::symmetric_channel_matrix(2, 0.1),
            crate::source_models::symmetric_channel_matrix(2, 0.2),
        )
        .unwrap();
        let region = SiRegion::new(&j, &DistortionMatrix::hamming(2)).unwrap();
        let rb = region.curve().envelope_at(0.0).feasible().unwrap();
        let hw = j.h_x_given_w();
        let free = region.check(&Quadruple { r: rb, r_k: 0.0, d: 0.0, h: hw - rb });
        assert!(free.member && free.no_encryption);
        let tight = region.check(&Quadruple { r: rb, r_k: rb, d: 0.0, h: hw });
        assert!(tight.member && !tight.no_encryption);
        let short = region.check(&Quadruple { r: rb, r_k: rb - 0.01, d: 0.0, h: hw });
        assert_eq!(short.violated, vec![Constraint::KeyRate]);
        assert!(short.explain().contains("R_k"));
    }
}
