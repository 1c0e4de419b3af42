//! Quantize, Huffman-code m-tuples, encrypt a prefix. Reports the empirical
//! rates, distortion and the equivocation bound.

use zdsec::causal_rd::DistortionMatrix;
use zdsec::secure_causal::{run_trials, DesignParams, SeparationScheme, Target};
use zdsec::source_models::{JointSourceModel, SourceModel};

fn main() -> zdsec::Result<()> {
    let model = SourceModel::new(vec![0.75, 0.25])?;
    let target = Target { d: 0.125, h: model.entropy() };
    let params = DesignParams { n: 10_000, m: 8, ..DesignParams::default() };
    let scheme = SeparationScheme::design_no_si(&model, &DistortionMatrix::hamming(2), target, params)?;
    let (q1, q2) = scheme.quantizer_strings();
    println!("quantizers {q1} then {q2}, switch at {}", scheme.switch_index());
    println!("rate bound {:.4}, key prefix {} bits", scheme.rate_bound(), scheme.key_len());

    let joint = JointSourceModel::without_side_information(model);
    for m in run_trials(&scheme, &joint, 4, 1)? {
        println!("trial {}: R = {:.4}, R_k = {:.4}, D = {:.4}, equivocation >= {:.4}", m.trial, m.r_emp, m.rk_emp, m.d_emp, m.h_bound);
    }
    Ok(())
}
