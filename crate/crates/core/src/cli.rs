//! Command-line experiment runner.
//!
//! Every subcommand is deterministic given `--seed`. Outputs are selected by
//! the extension of each `--emit` path; every CSV gets a `<path>.meta.json`
//! sidecar echoing the seed, crate version and parsed arguments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adversary::convergence_reports;
use crate::causal_rd::{rc_curve_with_limit, rc_si_curve_with_limit, DistortionMatrix, NoSiRegion, Quadruple, RdCurve, SiRegion};
use crate::codes::{build_huffman, InstantaneousCode, LengthProfile};
use crate::error::{Error, Result};
use crate::hull::EnvelopeValue;
use crate::keystream::derive_seed;
use crate::secure_causal::{run_trials, DesignParams, SeparationScheme, Target};
use crate::source_models::{JointSourceModel, SourceConfig, SourceModel};
use crate::zd_block::{region_points, simulate_block, BlockScheme};
use crate::zd_stream::simulate_stream;

#[derive(Debug, Parser, Serialize)]
#[command(name = "zdsec", version, about = "Zero-delay secret-key coding experiments")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; the extension picks the artifact. Repeatable.
    #[arg(long, global = true)]
    pub emit: Vec<PathBuf>,
    /// Cap on exhaustively enumerated states.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub limit_states: u128,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Block scheme with parsing information: trace.json or region.csv.
    Block(BlockArgs),
    /// Stream scheme without parsing information: trace.json or a .bin view.
    Stream(StreamArgs),
    /// Eavesdropper posterior audit along a list of stream lengths.
    Audit(AuditArgs),
    /// Causal rate-distortion curve over a distortion grid.
    Region(RegionArgs),
    /// Separation-scheme simulation at a target (D, h).
    CausalSim(CausalSimArgs),
    /// Membership of one (R, R_k, D, h) quadruple.
    Check(CheckArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BlockArgs {
    #[arg(long)]
    pub pmf: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Length profile such as 1-2-3-3; defaults to the Huffman code.
    #[arg(long)]
    pub profile: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct StreamArgs {
    #[arg(long)]
    pub pmf: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum SchemeKind {
    Block,
    Stream,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum CodeKind {
    Huffman,
    Fixed,
}

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeKind,
    #[arg(long)]
    pub pmf: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub n_list: Vec<usize>,
    #[arg(long, value_enum, default_value_t = CodeKind::Huffman)]
    pub code: CodeKind,
}

#[derive(Debug, Args, Serialize)]
pub struct RegionArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub dist: PathBuf,
    /// `start:stop:points`, evenly spaced and inclusive.
    #[arg(long, default_value = "0:1:21")]
    pub grid: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CausalSimArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long = "target-D")]
    pub target_d: f64,
    #[arg(long = "target-h")]
    pub target_h: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub sw_block_len: usize,
    #[arg(long, default_value_t = 0.25)]
    pub sw_margin: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub rk: f64,
    #[arg(long)]
    pub d: f64,
    #[arg(long)]
    pub h: f64,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => 2,
        Error::StateSpaceTooLarge { .. } => 3,
        _ => 1,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Block(a) => run_block(cli, a),
        Command::Stream(a) => run_stream(cli, a),
        Command::Audit(a) => run_audit(cli, a),
        Command::Region(a) => run_region(cli, a),
        Command::CausalSim(a) => run_causal_sim(cli, a),
        Command::Check(a) => run_check(a, cli.limit_states),
    }
}

/// A pmf file: `{"pmf": [..]}` (any source config) or a bare array.
pub fn load_pmf(path: &Path) -> Result<SourceModel> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<Vec<f64>>(&text) {
        Ok(pmf) => SourceModel::new(pmf),
        Err(_) => SourceConfig::from_json_str(&text)?.source(),
    }
}

fn load_joint(path: &Path) -> Result<(SourceConfig, JointSourceModel)> {
    let cfg = SourceConfig::from_path(path)?;
    let joint = cfg.joint()?;
    Ok((cfg, joint))
}

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

fn emits<'a>(cli: &'a Cli, ext: &'a str) -> impl Iterator<Item = &'a PathBuf> + 'a {
    cli.emit.iter().filter(move |p| extension(p) == ext)
}

fn reject_unknown(cli: &Cli, allowed: &[&str]) -> Result<()> {
    for p in &cli.emit {
        if !allowed.contains(&extension(p).as_str()) {
            return Err(Error::Config(format!("cannot emit {}: expected one of {}", p.display(), allowed.join(", "))));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Meta<'a> {
    seed: u64,
    version: &'static str,
    limit_states: String,
    command: &'a Command,
}

fn write_csv<S: Serialize>(cli: &Cli, path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let meta = Meta { seed: cli.seed, version: env!("CARGO_PKG_VERSION"), limit_states: cli.limit_states.to_string(), command: &cli.command };
    let mut side = path.as_os_str().to_owned();
    side.push(".meta.json");
    let mut f = fs::File::create(PathBuf::from(side))?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn parse_profile(s: &str) -> Result<LengthProfile> {
    let lengths = s
        .split('-')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad profile {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(LengthProfile::new(lengths))
}

#[derive(Serialize)]
struct RegionRow {
    profile: String,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "R_k")]
    r_k: f64,
    on_envelope: bool,
}

fn run_block(cli: &Cli, a: &BlockArgs) -> Result<()> {
    reject_unknown(cli, &["csv", "json"])?;
    let model = load_pmf(&a.pmf)?;
    let scheme = match &a.profile {
        Some(p) => BlockScheme::from_profile(&parse_profile(p)?, &model)?,
        None => BlockScheme::huffman(&model),
    };
    let trace = simulate_block(&scheme, &model, a.n, cli.seed)?;
    println!(
        "block: n={} block_len={} key_rate={:.6} coding_rate={:.6} round_trip_ok={}",
        trace.n, trace.block_len, trace.key_rate, trace.coding_rate, trace.round_trip_ok
    );
    for path in emits(cli, "json") {
        write_json(path, &trace)?;
    }
    let csvs: Vec<&PathBuf> = emits(cli, "csv").collect();
    if !csvs.is_empty() {
        if model.alphabet_size() > 12 {
            return Err(Error::StateSpaceTooLarge { required: model.alphabet_size() as u128, limit: 12 });
        }
        let region = region_points(&model)?;
        let rows: Vec<RegionRow> = region
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| RegionRow { profile: p.profile.to_string(), r: p.rate, r_k: p.key_rate, on_envelope: region.on_envelope(i) })
            .collect();
        for path in csvs {
            write_csv(cli, path, &rows)?;
        }
    }
    Ok(())
}

fn run_stream(cli: &Cli, a: &StreamArgs) -> Result<()> {
    reject_unknown(cli, &["json", "bin"])?;
    let model = load_pmf(&a.pmf)?;
    let code = build_huffman(&model);
    let (trace, stream) = simulate_stream(&code, &model, a.n, cli.seed)?;
    println!(
        "stream: n={} coded_bits={} key_rate={:.6} coding_rate={:.6} round_trip_ok={}",
        trace.n, trace.coded_bits, trace.key_rate, trace.coding_rate, trace.round_trip_ok
    );
    for path in emits(cli, "json") {
        write_json(path, &trace)?;
    }
    for path in emits(cli, "bin") {
        fs::write(path, stream.adversary_view().to_ascii())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct AuditRow {
    n: usize,
    expected_tv: f64,
    max_tv: f64,
    key_rate: f64,
    coding_rate: f64,
}

fn run_audit(cli: &Cli, a: &AuditArgs) -> Result<()> {
    reject_unknown(cli, &["csv"])?;
    let model = load_pmf(&a.pmf)?;
    let code = match a.code {
        CodeKind::Huffman => build_huffman(&model),
        CodeKind::Fixed => InstantaneousCode::fixed_length(model.alphabet_size())?,
    };
    let mut n_list = a.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    if n_list.first().is_none_or(|&n| n == 0) {
        return Err(Error::Config("n-list must hold positive counts".into()));
    }
    let mut rows = Vec::new();
    match a.scheme {
        SchemeKind::Stream => {
            let need = (*n_list.last().expect("non-empty") as u128) * code.max_len() as u128;
            if need > cli.limit_states {
                return Err(Error::StateSpaceTooLarge { required: need, limit: cli.limit_states });
            }
            for (i, r) in convergence_reports(&code, &model, &n_list)?.into_iter().enumerate() {
                let (trace, _) = simulate_stream(&code, &model, r.n, derive_seed(cli.seed, i as u64))?;
                rows.push(AuditRow { n: r.n, expected_tv: r.expected_tv, max_tv: r.max_tv, key_rate: trace.key_rate, coding_rate: trace.coding_rate });
            }
        }
        SchemeKind::Block => {
            let scheme = BlockScheme::new(code);
            // Blocks are independent across stages, so the posterior of X_t
            // given every block equals its posterior given block t alone.
            let (expected, max_tv) = scheme.posterior_tv(&model)?;
            for (i, &n) in n_list.iter().enumerate() {
                let trace = simulate_block(&scheme, &model, n, derive_seed(cli.seed, i as u64))?;
                rows.push(AuditRow { n, expected_tv: expected, max_tv, key_rate: trace.key_rate, coding_rate: trace.coding_rate });
            }
        }
    }
    for r in &rows {
        println!("n={} expected_tv={:.3e} max_tv={:.3e} key_rate={:.6} coding_rate={:.6}", r.n, r.expected_tv, r.max_tv, r.key_rate, r.coding_rate);
    }
    for path in emits(cli, "csv") {
        write_csv(cli, path, &rows)?;
    }
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("grid {s:?} must be start:stop:points"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = parts[2].parse().map_err(|_| bad())?;
    if points == 0 || !(stop >= start) {
        return Err(bad());
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    Ok((0..points).map(|i| start + (stop - start) * i as f64 / (points - 1) as f64).collect())
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "D")]
    d: f64,
    r_c: String,
    r_c_envelope: String,
    witness_f: String,
    witness_g: String,
}

fn value_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "infeasible".to_string(), |x| x.to_string())
}

fn curve_rows<W: Clone>(curve: &RdCurve<W>, grid: &[f64], wf: impl Fn(&W) -> String, wg: impl Fn(&W) -> String) -> Vec<CurveRow> {
    let mix = |f: &dyn Fn(&W) -> String, d: f64| -> String {
        match curve.time_share(d) {
            None => String::new(),
            Some(ts) if f(&ts.first.witness).is_empty() => String::new(),
            Some(ts) if ts.lambda >= 1.0 => f(&ts.first.witness),
            Some(ts) => format!("{}*{}+{}*{}", f(&ts.first.witness), ts.lambda, f(&ts.second.witness), 1.0 - ts.lambda),
        }
    };
    grid.iter()
        .map(|&d| CurveRow {
            d,
            r_c: value_cell(curve.staircase_at(d).map(|p| p.rate)),
            r_c_envelope: value_cell(match curve.envelope_at(d) {
                EnvelopeValue::Feasible(v) => Some(v),
                EnvelopeValue::Infeasible => None,
            }),
            witness_f: mix(&wf, d),
            witness_g: mix(&wg, d),
        })
        .collect()
}

fn run_region(cli: &Cli, a: &RegionArgs) -> Result<()> {
    reject_unknown(cli, &["csv"])?;
    let (cfg, joint) = load_joint(&a.joint)?;
    let dist = DistortionMatrix::from_path(&a.dist)?;
    let grid = parse_grid(&a.grid)?;
    let rows = if cfg.py_given_x.is_some() {
        let curve = rc_si_curve_with_limit(&joint, &dist, cli.limit_states)?;
        curve_rows(&curve, &grid, |w| w.f_string(), |w| w.g_string())
    } else {
        let curve = rc_curve_with_limit(joint.px(), &dist, cli.limit_states)?;
        curve_rows(&curve, &grid, |w| w.to_string(), |_| String::new())
    };
    for r in &rows {
        println!("D={:.6} r_c={} envelope={} f={} g={}", r.d, r.r_c, r.r_c_envelope, r.witness_f, r.witness_g);
    }
    for path in emits(cli, "csv") {
        write_csv(cli, path, &rows)?;
    }
    Ok(())
}

fn run_causal_sim(cli: &Cli, a: &CausalSimArgs) -> Result<()> {
    reject_unknown(cli, &["csv"])?;
    let (cfg, joint) = load_joint(&a.joint)?;
    let dist = DistortionMatrix::from_path(&a.dist)?;
    let params = DesignParams { n: a.n, m: a.m, sw_block_len: a.sw_block_len, sw_margin: a.sw_margin, sw_seed: derive_seed(cli.seed, 0x5357), ..DesignParams::default() };
    let target = Target { d: a.target_d, h: a.target_h };
    let scheme = if cfg.py_given_x.is_some() {
        rc_si_curve_with_limit(&joint, &dist, cli.limit_states)?;
        SeparationScheme::design_si(&joint, &dist, target, params)?
    } else {
        rc_curve_with_limit(joint.px(), &dist, cli.limit_states)?;
        SeparationScheme::design_no_si(joint.px(), &dist, target, params)?
    };
    let (q1, q2) = scheme.quantizer_strings();
    println!(
        "design: lambda={:.6} rate_bound={:.6} key_fraction={:.6} key_bits={} quantizers={} | {}",
        scheme.lambda(),
        scheme.rate_bound(),
        scheme.key_fraction(),
        scheme.key_len(),
        q1,
        q2
    );
    let metrics = run_trials(&scheme, &joint, a.trials, cli.seed)?;
    for m in &metrics {
        println!(
            "trial {}: R={:.6} Rk={:.6} D={:.6} h_bound={:.6} sw_error={:.4}",
            m.trial, m.r_emp, m.rk_emp, m.d_emp, m.h_bound, m.sw_error
        );
    }
    for path in emits(cli, "csv") {
        write_csv(cli, path, &metrics)?;
    }
    Ok(())
}

fn run_check(a: &CheckArgs, limit: u128) -> Result<()> {
    let (cfg, joint) = load_joint(&a.joint)?;
    let dist = DistortionMatrix::from_path(&a.dist)?;
    let q = Quadruple { r: a.r, r_k: a.rk, d: a.d, h: a.h };
    let report = if cfg.py_given_x.is_some() || cfg.pw_given_y.is_some() {
        rc_si_curve_with_limit(&joint, &dist, limit)?;
        SiRegion::new(&joint, &dist)?.check(&q)
    } else {
        rc_curve_with_limit(joint.px(), &dist, limit)?;
        NoSiRegion::new(joint.px(), &dist)?.check(&q)
    };
    println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "quadruple": q, "report": report, "summary": report.explain() }))?);
    Ok(())
}
