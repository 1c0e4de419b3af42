//! Causal rate-distortion curves with and without decoder side information,
//! and membership checks for (R, R_k, D, h).

use zdsec::causal_rd::{rc_curve, rc_si_curve, DistortionMatrix, NoSiRegion, Quadruple, SiRegion};
use zdsec::source_models::{JointSourceModel, SourceModel};

fn main() -> zdsec::Result<()> {
    let model = SourceModel::new(vec![0.75, 0.25])?;
    let d = DistortionMatrix::hamming(2);
    let curve = rc_curve(&model, &d)?;
    for p in curve.points() {
        println!("quantizer {} at D = {:.3}, rate {:.4}", p.witness, p.distortion, p.rate);
    }
    if let Some(mix) = curve.time_share(0.125) {
        println!("D = 0.125 is reached by {mix} at rate {:.4}", mix.rate());
    }

    let joint = JointSourceModel::symmetric_channel(model.clone(), 0.1)?;
    let si = rc_si_curve(&joint, &d)?;
    for step in 0..=5 {
        let dd = 0.05 * step as f64;
        println!(
            "D = {dd:.2}: r_c = {:.4}, with side information {:.4}",
            curve.envelope_at(dd).feasible().unwrap(),
            si.envelope_at(dd).feasible().unwrap()
        );
    }

    let q = Quadruple { r: 0.45, r_k: 0.45, d: 0.125, h: 0.8 };
    println!("no side information: {}", NoSiRegion::new(&model, &d)?.check(&q).explain());
    println!("with side information: {}", SiRegion::new(&joint, &d)?.check(&q).explain());
    Ok(())
}
