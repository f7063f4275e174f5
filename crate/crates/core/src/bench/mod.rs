//! Monte Carlo harness: SNR sweeps over sparsity classes and algorithms,
//! per-trial records, aggregated curves and CSV output.

mod config;
mod records;
mod tune;

use std::time::Instant;

use rayon::prelude::*;

pub use config::{parse_snr_grid, AlgorithmSpec, ExperimentConfig, Method, MSBL_MAX_ITERS};
pub use records::{
    aggregate, read_aggregate, read_records, write_aggregate, write_aggregate_to, write_records,
    AggregateRow, TrialRecord,
};
pub use tune::{default_grid, grid_search, TuningEntry};

use crate::baselines::msbl_em;
use crate::error::{Error, Result};
use crate::metrics::{f1_score, nmse, top_k_support};
use crate::mm::{tv_sbl, SolveReport};
use crate::model::{Dictionary, MeasurementSet};
use crate::signal_gen::{derive_seed, gen_dictionary, SparsityClass, Trial, TrialSpec};

const DICTIONARY_STREAM: u64 = 0xD1C7;

/// Seed of the dictionary, pattern and signal of one trial.
pub fn data_seed(master: u64, class: SparsityClass, trial: usize) -> u64 {
    let class_code = match class {
        SparsityClass::Homogeneous => 1,
        SparsityClass::Random => 2,
        SparsityClass::Hybrid => 3,
    };
    derive_seed(derive_seed(master, class_code), trial as u64)
}

/// Seed of the noise of one trial at one SNR.
pub fn noise_seed(data_seed: u64, snr_db: f64) -> u64 {
    derive_seed(data_seed, snr_db.to_bits())
}

/// Runs one algorithm on one data set.
pub fn run_algorithm(
    spec: &AlgorithmSpec,
    a: &Dictionary,
    y: &MeasurementSet,
) -> Result<SolveReport> {
    match spec.method {
        Method::Msbl => msbl_em(a, y, y.noise_variance(), &spec.options),
        Method::TvSbl(reg) => tv_sbl(a, y, &reg, &spec.options),
    }
}

/// Generates the data of one (class, SNR, trial) cell.
pub fn trial_data(
    config: &ExperimentConfig,
    class: SparsityClass,
    snr_db: f64,
    trial: usize,
) -> Result<Trial> {
    let spec = TrialSpec {
        class,
        n: config.n,
        m: config.m,
        l: config.l,
        k: config.k,
        snr_db,
    };
    let seed = data_seed(config.master_seed, class, trial);
    if config.fix_dictionary {
        let a = gen_dictionary(
            config.m,
            config.n,
            derive_seed(config.master_seed, DICTIONARY_STREAM),
        )?;
        spec.generate_with(a, seed, noise_seed(seed, snr_db))
    } else {
        spec.generate(seed, noise_seed(seed, snr_db))
    }
}

fn run_cell(
    config: &ExperimentConfig,
    class: SparsityClass,
    snr_db: f64,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let data = trial_data(config, class, snr_db, trial)?;
    let seed = data_seed(config.master_seed, class, trial);
    let mut out = Vec::with_capacity(config.algorithms.len());
    for alg in &config.algorithms {
        let start = Instant::now();
        let result = run_algorithm(alg, &data.dictionary, &data.measurements);
        let elapsed = start.elapsed().as_secs_f64();
        let mut rec = TrialRecord {
            class,
            snr_db,
            algorithm: alg.name.clone(),
            trial,
            seed,
            nmse: None,
            f1: None,
            outer_iters: None,
            failed: true,
            wall_time_seconds: config.record_timing.then_some(elapsed),
        };
        if let Ok(report) = result {
            let means = &report.posterior.means;
            rec.nmse = Some(nmse(means, &data.truth.x)?);
            rec.f1 = Some(f1_score(
                &top_k_support(means, config.k)?,
                &data.truth.support,
            ));
            rec.outer_iters = Some(report.outer_iters_used);
            rec.failed = false;
        }
        out.push(rec);
    }
    Ok(out)
}

/// Runs every configured algorithm on every (class, SNR, trial) cell.
///
/// Solver failures are recorded with `failed = true`; errors in data
/// generation or scoring abort the run. The result is sorted by class, SNR,
/// algorithm name and trial, and does not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let cells: Vec<(SparsityClass, f64, usize)> = config
        .classes
        .iter()
        .flat_map(|&c| {
            config
                .snr_grid_db
                .iter()
                .flat_map(move |&s| (0..config.trials).map(move |t| (c, s, t)))
        })
        .collect();
    let work = || -> Result<Vec<TrialRecord>> {
        let nested: Vec<Vec<TrialRecord>> = cells
            .par_iter()
            .map(|&(c, s, t)| run_cell(config, c, s, t))
            .collect::<Result<_>>()?;
        Ok(nested.into_iter().flatten().collect())
    };
    let mut records = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    records::sort_records(&mut records);
    Ok(records)
}
