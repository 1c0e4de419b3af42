//! The block scheme: every stage emits a fixed-size block, and the joint law
//! of source and blocks factorizes.

use zdsec::adversary::joint_independence_tv;
use zdsec::keystream::{KeyStream, PrivateRandomness};
use zdsec::source_models::{sample, SourceModel};
use zdsec::zd_block::{simulate_block, BlockScheme};

fn main() -> zdsec::Result<()> {
    let model = SourceModel::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let scheme = BlockScheme::huffman(&model);
    println!("block length {} bits", scheme.block_len());

    let mut alice = KeyStream::seeded(11);
    let mut bob = KeyStream::seeded(11);
    let mut private = PrivateRandomness::seeded(12);
    for x in sample(&model, 6, 1) {
        let block = scheme.encode_block(x, &mut alice, &mut private)?;
        let back = scheme.decode_block(&block, &mut bob)?;
        println!("x={x} block={} decoded={back}", block.bits());
    }

    let tv = joint_independence_tv(&scheme, &model, 2)?;
    println!("TV between P(x^2, z^2) and P(x^2)P(z^2): {tv:.2e}");

    let trace = simulate_block(&scheme, &model, 100_000, 3)?;
    println!("key rate {:.4} (expected {:.4}), coding rate {}", trace.key_rate, trace.expected_key_rate, trace.coding_rate);
    Ok(())
}
