//! The stream scheme: concatenated encrypted codewords with no block
//! boundaries visible to the eavesdropper.

use zdsec::codes::build_huffman;
use zdsec::keystream::KeyStream;
use zdsec::source_models::SourceModel;
use zdsec::zd_stream::{decode_stream, encode_stream, simulate_stream};

fn main() -> zdsec::Result<()> {
    let model = SourceModel::new(vec![0.5, 0.25, 0.25])?;
    let code = build_huffman(&model);
    let xs = [0, 2, 1, 0, 0, 2];
    let stream = encode_stream(&code, &xs, &mut KeyStream::seeded(4))?;
    println!("source {xs:?}");
    println!("eavesdropper sees {} ({} bits)", stream.adversary_view().bits(), stream.len());
    let back = decode_stream(&code, stream.bits(), &mut KeyStream::seeded(4), xs.len())?;
    println!("decoded {back:?}");

    let (trace, _) = simulate_stream(&code, &model, 100_000, 9)?;
    println!("coding rate {:.4}, key rate {:.4}, expected {:.4}", trace.coding_rate, trace.key_rate, trace.expected_rate);
    Ok(())
}
