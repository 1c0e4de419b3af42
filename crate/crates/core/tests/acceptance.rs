//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Reference values come from oracles written here, independent of the
//! library routines under test.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use zdsec::adversary::{
    convergence_curve, exact_equivocation, joint_independence_tv, markov_chain_check, noparse_posterior, KeyReuseEncoder,
    PartialOtpSystem,
};
use zdsec::bits::bits;
use zdsec::causal_rd::{rc_curve, rc_si_curve, DistortionMatrix, NoSiRegion, Quadruple, SiRegion};
use zdsec::codes::{build_huffman, expected_length, InstantaneousCode, LengthProfile};
use zdsec::hull::EnvelopeValue;
use zdsec::keystream::derive_seed;
use zdsec::secure_causal::{equivocation_bound, run_trials, slepian_wolf_binning, DesignParams, SeparationScheme, Target};
use zdsec::source_models::{sample, sample_channel, symmetric_channel_matrix, JointSourceModel, SourceModel};
use zdsec::zd_block::{region_points, simulate_block, BlockScheme};
use zdsec::zd_stream::simulate_stream;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
}

/// Minimum expected length over every assignment of lengths 1..=k obeying
/// Kraft's inequality.
fn brute_force_min_length(p: &[f64]) -> f64 {
    let k = p.len();
    if k == 1 {
        return 1.0;
    }
    let mut lengths = vec![1usize; k];
    let mut best = f64::INFINITY;
    loop {
        let kraft: f64 = lengths.iter().map(|&l| 0.5f64.powi(l as i32)).sum();
        if kraft <= 1.0 + 1e-15 {
            let len: f64 = p.iter().zip(&lengths).map(|(q, &l)| q * l as f64).sum();
            best = best.min(len);
        }
        let mut i = 0;
        loop {
            if i == k {
                return best;
            }
            lengths[i] += 1;
            if lengths[i] <= k {
                break;
            }
            lengths[i] = 1;
            i += 1;
        }
    }
}

fn random_pmf(rng: &mut ChaCha20Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let k = 2 + i % 5;
        let p = random_pmf(&mut rng, k);
        let m = SourceModel::new(p.clone()).unwrap();
        let lib = expected_length(&build_huffman(&m), &m).unwrap();
        worst = worst.max((lib - brute_force_min_length(&p)).abs());
    }
    let elapsed = start.elapsed();
    outcome(worst <= 1e-12 && elapsed < Duration::from_secs(10), format!("max |L_huffman - L_bruteforce| = {worst:.2e}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let pmfs = [
        vec![0.7, 0.3],
        vec![0.5, 0.3, 0.2],
        vec![0.6, 0.25, 0.15],
        vec![0.4, 0.3, 0.2, 0.1],
        vec![0.25; 4],
        vec![0.55, 0.2, 0.15, 0.1],
    ];
    let mut worst: f64 = 0.0;
    for p in pmfs {
        let m = SourceModel::new(p).unwrap();
        worst = worst.max(joint_independence_tv(&BlockScheme::huffman(&m), &m, 2).unwrap());
    }
    let elapsed = start.elapsed();
    outcome(worst <= 1e-12 && elapsed < Duration::from_secs(30), format!("max TV(P(x^2, z^2), P(x^2)P(z^2)) = {worst:.2e}, {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    let p = [0.4, 0.3, 0.2, 0.1];
    let m = SourceModel::new(p.to_vec()).unwrap();
    let l = brute_force_min_length(&p);
    let t = simulate_block(&BlockScheme::huffman(&m), &m, 100_000, 3).unwrap();
    let rel = (t.key_rate - l).abs() / l;
    let pass = rel <= 0.01 && t.coding_rate == 3.0 && t.coding_rate >= 2.0 && t.round_trip_ok;
    outcome(pass, format!("L(X)={l:.4} key_rate={:.5} (rel err {rel:.2e}) coding_rate={}", t.key_rate, t.coding_rate))
}

fn criterion_4() -> Outcome {
    let p = [0.4, 0.3, 0.2, 0.1];
    let m = SourceModel::new(p.to_vec()).unwrap();
    let l = brute_force_min_length(&p);
    // sorted probabilities against sorted lengths
    let oracle = |lengths: [usize; 4]| -> (f64, f64) {
        (*lengths.iter().max().unwrap() as f64, p.iter().zip(lengths).map(|(q, l)| q * l as f64).sum())
    };
    let expected = [("1-2-3-3", oracle([1, 2, 3, 3])), ("2-2-2-2", oracle([2, 2, 2, 2]))];
    let region = region_points(&m).unwrap();
    let pts = region.points();
    let mut pass = pts.len() == expected.len();
    for (pt, (name, (r, rk))) in pts.iter().zip(expected) {
        pass &= pt.profile == name.split('-').map(|v| v.parse().unwrap()).collect::<Vec<usize>>().pipe(LengthProfile::new);
        pass &= (pt.rate - r).abs() < 1e-12 && (pt.key_rate - rk).abs() < 1e-12;
        pass &= pt.key_rate >= l - 1e-12 && pt.rate >= 2.0;
    }
    pass &= (0..pts.len()).all(|i| region.on_envelope(i));
    pass &= region.envelope().vertices().len() == 2;
    let lin = region.key_rate_at(2.5).feasible().unwrap_or(f64::NAN);
    pass &= (lin - 1.95).abs() < 1e-12;
    let shown: Vec<String> = pts.iter().map(|p| format!("{}->({}, {:.4})", p.profile, p.rate, p.key_rate)).collect();
    outcome(pass, format!("points {}", shown.join(", ")))
}

trait Pipe: Sized {
    fn pipe<R>(self, f: impl FnOnce(Self) -> R) -> R {
        f(self)
    }
}
impl<T> Pipe for T {}

fn criterion_5() -> Outcome {
    let m = SourceModel::new(vec![0.5, 0.25, 0.25]).unwrap();
    let (t, _) = simulate_stream(&build_huffman(&m), &m, 100_000, 5).unwrap();
    let pass = (t.coding_rate - 1.5).abs() / 1.5 <= 0.01 && (t.key_rate - 1.5).abs() / 1.5 <= 0.01 && t.round_trip_ok;
    outcome(pass, format!("coding_rate={:.5} key_rate={:.5} round_trip_ok={}", t.coding_rate, t.key_rate, t.round_trip_ok))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let m = SourceModel::new(vec![0.5, 0.25, 0.25]).unwrap();
    let code = InstantaneousCode::new(vec![bits("0"), bits("10"), bits("11")]).unwrap();
    let curve = convergence_curve(&code, &m, &[10, 100, 1000]).unwrap();
    let decreasing = curve.windows(2).all(|w| w[1].1 < w[0].1);
    let point_mass = [1, 10, 100, 1000].iter().all(|&n| noparse_posterior(&code, &m, n, n).unwrap() == vec![1.0, 0.0, 0.0]);
    let elapsed = start.elapsed();
    let shown: Vec<String> = curve.iter().map(|(n, tv)| format!("{n}:{tv:.4e}")).collect();
    outcome(
        decreasing && point_mass && elapsed < Duration::from_secs(60),
        format!("expected_tv {} point_mass={point_mass}, {elapsed:.2?}", shown.join(" ")),
    )
}

fn criterion_7() -> Outcome {
    let bin = SourceModel::new(vec![0.7, 0.3]).unwrap();
    let ter = SourceModel::new(vec![0.5, 0.3, 0.2]).unwrap();
    let d_bin = markov_chain_check(&BlockScheme::huffman(&bin), &bin, 2).unwrap();
    let d_ter = markov_chain_check(&BlockScheme::huffman(&ter), &ter, 2).unwrap();
    let reuse = markov_chain_check(&KeyReuseEncoder::new(2).unwrap(), &SourceModel::uniform(2).unwrap(), 2).unwrap();
    outcome(
        d_bin.abs() <= 1e-12 && d_ter.abs() <= 1e-12 && reuse > 0.0,
        format!("binary={d_bin:.1e} ternary={d_ter:.1e} key_reuse={reuse:.3}"),
    )
}

/// Lower convex envelope of `(D, rate)` points at `d`: the cheapest mixture
/// of at most two points with distortion at most `d`.
fn oracle_envelope(points: &[(f64, f64)], d: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut take = |v: f64| best = Some(best.map_or(v, |b: f64| b.min(v)));
    for &(di, ri) in points {
        if di <= d + 1e-12 {
            take(ri);
        }
        for &(dj, rj) in points {
            if di < d && d < dj {
                let w = (dj - d) / (dj - di);
                take(w * ri + (1.0 - w) * rj);
            }
        }
    }
    best
}

fn pareto(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|&(d, r)| !points.iter().any(|&(d2, r2)| d2 <= d && r2 <= r && (d2 < d - 1e-12 || r2 < r - 1e-12)))
        .collect()
}

/// Every map f: X -> X_hat.
fn oracle_rc_points(p: &[f64], dist: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let k = p.len();
    let base = dist[0].len();
    let mut out = Vec::new();
    for idx in 0..base.pow(k as u32) {
        let f: Vec<usize> = (0..k).map(|x| idx / base.pow(x as u32) % base).collect();
        let d: f64 = (0..k).map(|x| p[x] * dist[x][f[x]]).sum();
        let mut q = vec![0.0; base];
        for x in 0..k {
            q[f[x]] += p[x];
        }
        out.push((d, h(&q)));
    }
    out
}

/// Every encoder f: X -> {0..|X|-1} and every decoder table g: S x Y -> X_hat.
fn oracle_rc_si_points(pxy: &[Vec<f64>], dist: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let k = pxy.len();
    let ny = pxy[0].len();
    let base = dist[0].len();
    let mut out = Vec::new();
    for fi in 0..k.pow(k as u32) {
        let f: Vec<usize> = (0..k).map(|x| fi / k.pow(x as u32) % k).collect();
        let mut psy = vec![vec![0.0; ny]; k];
        for x in 0..k {
            for y in 0..ny {
                psy[f[x]][y] += pxy[x][y];
            }
        }
        let py: Vec<f64> = (0..ny).map(|y| (0..k).map(|s| psy[s][y]).sum()).collect();
        let rate: f64 = (0..ny).filter(|&y| py[y] > 0.0).map(|y| py[y] * h(&(0..k).map(|s| psy[s][y] / py[y]).collect::<Vec<_>>())).sum();
        let cells = k * ny;
        for gi in 0..base.pow(cells as u32) {
            let g = |s: usize, y: usize| gi / base.pow((s * ny + y) as u32) % base;
            let d: f64 = (0..k).flat_map(|x| (0..ny).map(move |y| (x, y))).map(|(x, y)| pxy[x][y] * dist[x][g(f[x], y)]).sum();
            out.push((d, rate));
        }
    }
    pareto(out)
}

fn hamming(k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|i| (0..k).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect()
}

fn criterion_8() -> Outcome {
    let p = [0.75, 0.25];
    let m = SourceModel::new(p.to_vec()).unwrap();
    let curve = rc_curve(&m, &DistortionMatrix::hamming(2)).unwrap();
    let frontier: Vec<(f64, f64)> = curve.points().iter().map(|q| (q.distortion, q.rate)).collect();
    let h_formula = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
    let mut oracle = pareto(oracle_rc_points(&p, &hamming(2)));
    oracle.sort_by(|a, b| a.0.total_cmp(&b.0));
    oracle.dedup();
    let mut pass = frontier.len() == 2 && oracle.len() == 2;
    pass &= frontier.iter().zip(&oracle).all(|(a, b)| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    pass &= frontier[0].0.abs() < 1e-12 && (frontier[0].1 - h_formula).abs() < 1e-12;
    pass &= (frontier[1].0 - 0.25).abs() < 1e-12 && frontier[1].1.abs() < 1e-12;
    let linear = (0..=20).all(|i| {
        let d = 0.25 * i as f64 / 20.0;
        let v = curve.envelope_at(d).feasible().unwrap();
        (v - h_formula * (1.0 - d / 0.25)).abs() < 1e-12
    });
    pass &= linear;
    let at_eighth = curve.envelope_at(0.125).feasible().unwrap();
    pass &= (at_eighth - 0.405639).abs() < 1e-6;

    let same = JointSourceModel::new(m.clone(), vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0], vec![1.0]]).unwrap();
    let si_same = rc_si_curve(&same, &DistortionMatrix::hamming(2)).unwrap().envelope_at(0.0);
    pass &= si_same == EnvelopeValue::Feasible(0.0);

    let indep = JointSourceModel::new(m.clone(), vec![vec![0.3, 0.7], vec![0.3, 0.7]], vec![vec![1.0], vec![1.0]]).unwrap();
    let si_indep = rc_si_curve(&indep, &DistortionMatrix::hamming(2)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let d = 0.3 * i as f64 / 19.0;
        let a = si_indep.envelope_at(d).feasible().unwrap();
        let b = curve.envelope_at(d).feasible().unwrap();
        worst = worst.max((a - b).abs());
    }
    pass &= worst <= 1e-9;
    outcome(
        pass,
        format!(
            "frontier {:?} envelope(0.125)={at_eighth:.6} linear={linear} si(Y=X,0)={:?} max|si_indep - rc|={worst:.1e}",
            frontier,
            si_same.feasible()
        ),
    )
}

fn random_stochastic(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| random_pmf(rng, cols)).collect()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut agree = 0;
    let mut clause_ok = 0;
    let mut fired = 0;
    let mut members = 0;
    let total = 100;
    for i in 0..total {
        let k = 2 + i % 2;
        let px = random_pmf(&mut rng, k);
        let pyx = random_stochastic(&mut rng, k, 2);
        let pwy = random_stochastic(&mut rng, 2, 2);
        let model = SourceModel::new(px.clone()).unwrap();
        let joint = JointSourceModel::new(model.clone(), pyx.clone(), pwy.clone()).unwrap();
        let dist = hamming(k);
        let pxy: Vec<Vec<f64>> = (0..k).map(|x| (0..2).map(|y| px[x] * pyx[x][y]).collect()).collect();
        let pxw: Vec<Vec<f64>> = (0..k).map(|x| (0..2).map(|w| (0..2).map(|y| pxy[x][y] * pwy[y][w]).sum()).collect()).collect();
        let pw: Vec<f64> = (0..2).map(|w| (0..k).map(|x| pxw[x][w]).sum()).collect();
        let h_x_w: f64 = (0..2).map(|w| pw[w] * h(&(0..k).map(|x| pxw[x][w] / pw[w]).collect::<Vec<_>>())).sum();
        let si_points = oracle_rc_si_points(&pxy, &dist);
        let rc_points = pareto(oracle_rc_points(&px, &dist));

        let q = Quadruple { r: rng.gen_range(0.0..1.6), r_k: rng.gen_range(0.0..1.6), d: rng.gen_range(0.0..0.7), h: rng.gen_range(0.0..1.6) };
        let tol = 1e-9;

        let si_report = SiRegion::new(&joint, &DistortionMatrix::new(dist.clone()).unwrap()).unwrap().check(&q);
        let si_direct = oracle_envelope(&si_points, q.d).map(|r| {
            let member = q.r >= r - tol && q.h <= h_x_w + tol && q.r_k >= (q.h - h_x_w + r).max(0.0) - tol;
            (member, q.h - h_x_w + r <= tol)
        });
        let no_si_report = NoSiRegion::new(&model, &DistortionMatrix::new(dist.clone()).unwrap()).unwrap().check(&q);
        let h_x = h(&px);
        let no_si_direct = oracle_envelope(&rc_points, q.d).map(|r| q.r >= r - tol && q.h <= h_x + tol && q.r_k >= q.h - h_x + r - tol);

        let si_ok = match si_direct {
            Some((member, clause)) => {
                if clause {
                    fired += 1;
                }
                clause_ok += usize::from(si_report.no_encryption == clause);
                si_report.member == member
            }
            None => {
                clause_ok += 1;
                !si_report.member && si_report.rate_bound.is_none()
            }
        };
        let no_si_ok = no_si_report.member == no_si_direct.unwrap_or(false);
        members += usize::from(si_report.member);
        agree += usize::from(si_ok && no_si_ok);
    }
    outcome(
        agree == total && clause_ok == total,
        format!("{agree}/{total} membership agreements, clause agreements {clause_ok}/{total} (fired {fired}, members {members})"),
    )
}

fn criterion_10() -> Outcome {
    let m = SourceModel::new(vec![0.75, 0.25]).unwrap();
    let h_x = m.entropy();
    let joint = JointSourceModel::without_side_information(m.clone());
    let params = DesignParams { n: 10_000, m: 8, ..DesignParams::default() };
    let scheme = SeparationScheme::design_no_si(&m, &DistortionMatrix::hamming(2), Target { d: 0.125, h: h_x }, params).unwrap();
    let runs = run_trials(&scheme, &joint, 10, 10).unwrap();
    let mean = |f: &dyn Fn(&zdsec::secure_causal::RunMetrics) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    let (d, r, rk, hb) = (mean(&|x| x.d_emp), mean(&|x| x.r_emp), mean(&|x| x.rk_emp), mean(&|x| x.h_bound));
    let worst_d = runs.iter().map(|x| x.d_emp).fold(0.0, f64::max);
    let mut pass = d <= 0.13 && r <= 0.406 + 0.125 + 0.05 && rk <= 0.406 + 0.05 && hb >= h_x - 0.05;

    let uniform = JointSourceModel::without_side_information(SourceModel::uniform(2).unwrap());
    let one_bit = InstantaneousCode::new(vec![bits("0"), bits("1")]).unwrap();
    let exact = exact_equivocation(&PartialOtpSystem { code: one_bit, key_bits: 2 }, &uniform, 4).unwrap();
    let bound = equivocation_bound(1.0, 4, 2, 4);
    pass &= exact == 0.5 && bound == 0.5;
    outcome(
        pass,
        format!(
            "mean of 10 runs: D={d:.4} R={r:.4} Rk={rk:.4} h_bound={hb:.4} (h={h_x:.4}); worst-trial D={worst_d:.4}; tiny instance exact={exact} bound={bound}"
        ),
    )
}

fn criterion_11() -> Outcome {
    let joint = vec![vec![0.45, 0.05], vec![0.05, 0.45]];
    let h_s_y = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
    let trials = 500;
    let (mut wide, mut narrow, mut full) = (0, 0, 0);
    for i in 0..trials {
        let s = sample(&SourceModel::uniform(2).unwrap(), 200, derive_seed(11, i));
        let y = sample_channel(&symmetric_channel_matrix(2, 0.1), &s, &mut ChaCha20Rng::seed_from_u64(derive_seed(12, i)));
        let code_seed = derive_seed(13, i);
        wide += usize::from(slepian_wolf_binning(&s, &y, &joint, h_s_y + 0.25, code_seed).error);
        narrow += usize::from(slepian_wolf_binning(&s, &y, &joint, h_s_y + 0.05, code_seed).error);
        full += usize::from(slepian_wolf_binning(&s, &y, &joint, 1.0, code_seed).error);
    }
    let t = trials as f64;
    outcome(
        wide <= narrow && full == 0,
        format!(
            "error at H+0.25: {:.3}, at H+0.05: {:.3}, at log|S|: {:.3} ({trials} paired trials, n=200)",
            wide as f64 / t,
            narrow as f64 / t,
            full as f64 / t
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Huffman optimality vs exhaustive Kraft search", criterion_1),
        ("block scheme perfect secrecy, 2 stages", criterion_2),
        ("block scheme key rate and coding rate", criterion_3),
        ("4-symbol (R, R_k) region and envelope", criterion_4),
        ("stream scheme rates and round trip", criterion_5),
        ("no-parsing posterior convergence", criterion_6),
        ("Markov chain check", criterion_7),
        ("causal rate-distortion curves", criterion_8),
        ("region membership vs direct evaluation", criterion_9),
        ("separation scheme achievability", criterion_10),
        ("Slepian-Wolf binning toy", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {:>2} [{}] {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
