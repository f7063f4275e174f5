//! Monte Carlo NMSE and F1 curves over SNR, written as CSV.
//!
//! cargo run --release --example snr_sweep -- [trials] [output.csv]

use tvsbl::bench::{aggregate, run_experiment, write_aggregate, ExperimentConfig};
use tvsbl::SparsityClass;

fn main() -> tvsbl::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map_or(10, |s| s.parse().expect("trials"));
    let out = args.next();

    let config = ExperimentConfig {
        trials,
        classes: vec![SparsityClass::Homogeneous],
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&config)?;
    let rows = aggregate(&records);

    println!(
        "{:>6}  {:<16} {:>12} {:>8}",
        "SNR", "algorithm", "median NMSE", "F1"
    );
    for row in &rows {
        println!(
            "{:>6.1}  {:<16} {:>12.5} {:>8.3}",
            row.snr_db,
            row.algorithm,
            row.nmse_median.unwrap_or(f64::NAN),
            row.f1_mean.unwrap_or(f64::NAN)
        );
    }
    if let Some(path) = out {
        write_aggregate(&path, &rows)?;
        println!("wrote {path}");
    }
    Ok(())
}
