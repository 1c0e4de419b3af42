//! The separation scheme when the decoder sees Y through a binary symmetric
//! channel and the eavesdropper sees nothing extra.

use zdsec::causal_rd::DistortionMatrix;
use zdsec::secure_causal::{run_trials, DesignParams, SeparationScheme, Target};
use zdsec::source_models::{JointSourceModel, SourceModel};

fn main() -> zdsec::Result<()> {
    let joint = JointSourceModel::symmetric_channel(SourceModel::uniform(2)?, 0.1)?;
    let params = DesignParams { n: 2_000, ..DesignParams::default() };
    let scheme = SeparationScheme::design_si(&joint, &DistortionMatrix::hamming(2), Target { d: 0.05, h: 0.5 }, params)?;
    println!("rate bound {:.4}, entropy bound {:.4}, key {} bits", scheme.rate_bound(), scheme.entropy_bound(), scheme.key_len());
    for m in run_trials(&scheme, &joint, 3, 7)? {
        println!(
            "trial {}: R = {:.4}, R_k = {:.4}, D = {:.4}, failed blocks {}/{}",
            m.trial, m.r_emp, m.rk_emp, m.d_emp, m.sw_failed_blocks, m.sw_blocks
        );
    }
    Ok(())
}
