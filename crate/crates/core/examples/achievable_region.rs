//! Coding rate vs. key rate trade-off of the block scheme, and a time-shared
//! scheme at a rate between two vertices.

use zdsec::keystream::{KeyStream, PrivateRandomness};
use zdsec::source_models::{sample, SourceModel};
use zdsec::zd_block::region_points;

fn main() -> zdsec::Result<()> {
    let model = SourceModel::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let region = region_points(&model)?;
    for (i, p) in region.points().iter().enumerate() {
        println!("profile {} -> R = {}, R_k = {:.3}, on envelope: {}", p.profile, p.rate, p.key_rate, region.on_envelope(i));
    }
    for r in [2.0, 2.25, 2.5, 3.0] {
        println!("envelope at R = {r}: R_k = {:.4}", region.key_rate_at(r).feasible().unwrap());
    }

    let scheme = region.achieve(2.5)?;
    let xs = sample(&model, 10_000, 5);
    let (mut alice, mut bob) = (KeyStream::seeded(1), KeyStream::seeded(1));
    let mut private = PrivateRandomness::seeded(2);
    let mut bits = 0;
    for (t, &x) in xs.iter().enumerate() {
        let block = scheme.encode_block(t, x, &mut alice, &mut private)?;
        bits += block.len();
        assert_eq!(scheme.decode_block(t, &block, &mut bob)?, x);
    }
    let n = xs.len() as f64;
    println!("time-shared at R = 2.5: coding rate {:.4}, key rate {:.4}", bits as f64 / n, alice.consumed_bits() as f64 / n);
    Ok(())
}
