//! Random binning of a binary sequence decoded with correlated side
//! information, at a few rates above H(S|Y).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use zdsec::keystream::derive_seed;
use zdsec::secure_causal::slepian_wolf_binning;
use zdsec::source_models::{binary_entropy, sample, sample_channel, symmetric_channel_matrix, SourceModel};

fn main() {
    let joint = vec![vec![0.45, 0.05], vec![0.05, 0.45]];
    let h = binary_entropy(0.1);
    let trials = 40;
    for margin in [0.05, 0.15, 0.25, 1.0 - h] {
        let mut errors = 0;
        for i in 0..trials {
            let s = sample(&SourceModel::uniform(2).unwrap(), 200, derive_seed(1, i));
            let y = sample_channel(&symmetric_channel_matrix(2, 0.1), &s, &mut ChaCha20Rng::seed_from_u64(derive_seed(2, i)));
            errors += usize::from(slepian_wolf_binning(&s, &y, &joint, h + margin, derive_seed(3, i)).error);
        }
        println!("rate {:.3} bits/symbol: block error rate {:.3}", h + margin, errors as f64 / trials as f64);
    }
}
