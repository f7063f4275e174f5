//! Drive an experiment from `key = value` text and keep per-trial records.
//!
//! cargo run --release --example config_file -- [config.txt]

use tvsbl::bench::{
    aggregate, read_records, run_experiment, write_aggregate, write_records, ExperimentConfig,
};

const SAMPLE: &str = "\
# small random-versus-block comparison
preset = quick
trials = 5
snr = 0:10:20
classes = homogeneous, random
algorithms = msbl, lin=linear-tv:3, log=log-tv:1:0.01
seed = 42
";

fn main() -> tvsbl::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::parse(SAMPLE)?,
    };
    let dir = std::env::temp_dir().join("tvsbl-config-example");
    std::fs::create_dir_all(&dir).map_err(|e| tvsbl::Error::io(&dir, e))?;

    let records = run_experiment(&config)?;
    let per_trial = dir.join("records.csv");
    write_records(&per_trial, &records)?;
    write_aggregate(dir.join("aggregate.csv"), &aggregate(&records))?;

    let reloaded = read_records(&per_trial)?;
    let failed = reloaded.iter().filter(|r| r.failed).count();
    println!(
        "{} records ({failed} failed) in {}",
        reloaded.len(),
        dir.display()
    );
    for row in aggregate(&reloaded) {
        println!(
            "{:<12} {:>5.1} dB {:<6} median NMSE {:.4}",
            row.class.tag(),
            row.snr_db,
            row.algorithm,
            row.nmse_median.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
