use crate::bench::{aggregate, run_experiment, AlgorithmSpec, ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::regularizers::TvRegularizer;
use crate::signal_gen::SparsityClass;

/// Score of one candidate regularizer.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningEntry {
    pub regularizer: TvRegularizer,
    /// Median NMSE at each SNR of the sweep, in sweep order.
    pub median_nmse: Vec<f64>,
    /// Mean over the sweep of the median NMSE in dB (lower is better).
    pub score_db: f64,
    pub failed: usize,
}

/// β ∈ {0.1, 0.3, 1, 3} for Linear TV, and additionally ε ∈ {0.01, 0.1}
/// for Log TV.
pub fn default_grid() -> (Vec<TvRegularizer>, Vec<TvRegularizer>) {
    let betas = [0.1, 0.3, 1.0, 3.0];
    let linear = betas
        .iter()
        .map(|&beta| TvRegularizer::Linear { beta })
        .collect();
    let log = [1e-2, 1e-1]
        .iter()
        .flat_map(|&epsilon| {
            betas
                .iter()
                .map(move |&beta| TvRegularizer::Log { beta, epsilon })
        })
        .collect();
    (linear, log)
}

/// Evaluates every candidate on `class` over the SNR grid and trials of
/// `base`, returning entries sorted best first. Ties keep candidate order.
pub fn grid_search(
    base: &ExperimentConfig,
    class: SparsityClass,
    candidates: &[TvRegularizer],
) -> Result<Vec<TuningEntry>> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no tuning candidates".into()));
    }
    let algorithms: Vec<AlgorithmSpec> = candidates
        .iter()
        .enumerate()
        .map(|(i, reg)| {
            let mut spec = AlgorithmSpec::new(Method::TvSbl(*reg)).named(format!("c{i:03}"));
            if let Some(template) = base.algorithms.iter().find(|a| a.method != Method::Msbl) {
                spec.options = template.options.clone();
            }
            spec
        })
        .collect();
    let config = ExperimentConfig {
        classes: vec![class],
        algorithms,
        output_path: None,
        records_path: None,
        record_timing: false,
        ..base.clone()
    };
    let rows = aggregate(&run_experiment(&config)?);
    let mut entries: Vec<TuningEntry> = candidates
        .iter()
        .enumerate()
        .map(|(i, reg)| {
            let name = format!("c{i:03}");
            let mine: Vec<_> = rows.iter().filter(|r| r.algorithm == name).collect();
            let median_nmse: Vec<f64> = mine
                .iter()
                .map(|r| r.nmse_median.unwrap_or(f64::INFINITY))
                .collect();
            let score_db = median_nmse.iter().map(|v| 10.0 * v.log10()).sum::<f64>()
                / median_nmse.len() as f64;
            TuningEntry {
                regularizer: *reg,
                median_nmse,
                score_db,
                failed: mine.iter().map(|r| r.failed).sum(),
            }
        })
        .collect();
    entries.sort_by(|a, b| a.score_db.total_cmp(&b.score_db));
    Ok(entries)
}
