//! What the total stream length reveals about the first symbol, and how
//! that leakage fades as the stream grows.

use zdsec::adversary::{convergence_curve, length_distribution, noparse_posterior, posterior_report};
use zdsec::codes::build_huffman;
use zdsec::source_models::SourceModel;

fn main() -> zdsec::Result<()> {
    let model = SourceModel::new(vec![0.5, 0.25, 0.25])?;
    let code = build_huffman(&model);

    let dist = length_distribution(&code, &model, 4)?;
    println!("length law after 4 symbols:");
    for (l, p) in dist.iter() {
        println!("  L={l}: {p:.4}  posterior {:?}", noparse_posterior(&code, &model, 4, l)?);
    }

    let report = posterior_report(&code, &model, 20)?;
    println!("n=20: expected TV {:.4}, worst TV {:.4}", report.expected_tv, report.max_tv);

    for (n, tv) in convergence_curve(&code, &model, &[10, 100, 1000, 10_000])? {
        println!("n={n:>6}: expected TV {tv:.5}");
    }
    Ok(())
}
