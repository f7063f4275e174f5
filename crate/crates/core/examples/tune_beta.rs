//! Grid search of β (and ε) for both TV penalties.
//!
//! cargo run --release --example tune_beta -- [trials]

use tvsbl::bench::{default_grid, grid_search, ExperimentConfig};
use tvsbl::SparsityClass;

fn main() -> tvsbl::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map_or(10, |s| s.parse().expect("trials"));
    let base = ExperimentConfig {
        snr_grid_db: vec![0.0, 10.0, 20.0],
        trials,
        ..ExperimentConfig::default()
    };
    let (linear, log) = default_grid();
    for candidates in [linear, log] {
        let ranked = grid_search(&base, SparsityClass::Homogeneous, &candidates)?;
        for (rank, entry) in ranked.iter().enumerate() {
            let medians: Vec<String> = entry
                .median_nmse
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect();
            println!(
                "{:>2}. {:<16} {:>7.2} dB  [{}]",
                rank + 1,
                entry.regularizer.to_string(),
                entry.score_db,
                medians.join(", ")
            );
        }
        println!();
    }
    Ok(())
}
