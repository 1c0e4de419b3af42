//! Huffman codes, complete length profiles and conditional code lengths.

use zdsec::codes::{build_huffman, conditional_huffman_length, enumerate_complete_profiles, expected_length, huffman_length};
use zdsec::source_models::SourceModel;

fn main() -> zdsec::Result<()> {
    let model = SourceModel::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let code = build_huffman(&model);
    for (x, word) in code.codewords().iter().enumerate() {
        println!("x={x} p={:.2} codeword={word}", model.prob(x));
    }
    println!("L(X) = {:.4}, H(X) = {:.4}", huffman_length(&model), model.entropy());

    println!("complete profiles for 4 symbols:");
    for profile in enumerate_complete_profiles(4) {
        let realized = profile.realize(&model)?;
        println!("  {profile}: expected length {:.3}", expected_length(&realized, &model)?);
    }

    // X uniform on 4 symbols, Y tells whether X is in {0, 1}.
    let joint = vec![vec![0.25, 0.0], vec![0.25, 0.0], vec![0.0, 0.25], vec![0.0, 0.25]];
    println!("L(X|Y) = {}", conditional_huffman_length(&joint)?);
    Ok(())
}
