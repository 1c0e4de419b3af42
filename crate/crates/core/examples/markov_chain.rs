//! Checks whether the key stage K_t is independent of the past given X_t.
//! The block scheme passes, an encoder that reuses its first key fails.

use zdsec::adversary::{markov_chain_check, KeyReuseEncoder};
use zdsec::source_models::SourceModel;
use zdsec::zd_block::BlockScheme;

fn main() -> zdsec::Result<()> {
    for pmf in [vec![0.7, 0.3], vec![0.5, 0.3, 0.2]] {
        let model = SourceModel::new(pmf.clone())?;
        let dev = markov_chain_check(&BlockScheme::huffman(&model), &model, 2)?;
        println!("block scheme on {pmf:?}: deviation {dev:.2e}");
    }
    let uniform = SourceModel::uniform(2)?;
    let dev = markov_chain_check(&KeyReuseEncoder::new(2)?, &uniform, 2)?;
    println!("key-reusing encoder: deviation {dev:.3}");
    Ok(())
}
