use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use tvsbl::bench::{self, AlgorithmSpec, ExperimentConfig};
use tvsbl::io::{read_matrix, write_matrix};
use tvsbl::{
    f1_score, nmse, top_k_support, Dictionary, Error, MeasurementSet, Result, SparsityClass,
};

#[derive(Parser)]
#[command(
    name = "tvsbl",
    version,
    about = "TV-regularized sparse Bayesian learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write aggregated CSV
    Run(RunArgs),
    /// Solve one synthetic trial and print the γ profile
    Demo(DemoArgs),
    /// Write one synthetic data set as matrix files
    Gen(GenArgs),
    /// Recover X from a dictionary and measurement file
    Solve(SolveArgs),
    /// Grid-search β (and ε) on one class
    Tune(TuneArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// 50 trials at 0, 10 and 20 dB
    #[arg(long)]
    quick: bool,
    /// SNR list, e.g. `0:5:20` or `0,10,20`
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated classes
    #[arg(long = "class")]
    classes: Option<String>,
    /// Algorithm, repeatable: `msbl`, `linear-tv:β`, `log-tv:β:ε`, optionally `name=...`
    #[arg(long = "algo")]
    algorithms: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Aggregated CSV (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial CSV
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Fill the wall-time column
    #[arg(long)]
    timing: bool,
    /// One dictionary for the whole experiment
    #[arg(long)]
    fix_dictionary: bool,
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long, default_value = "homogeneous")]
    class: SparsityClass,
    #[arg(long, default_value_t = 20.0)]
    snr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 150)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    l: usize,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    trial: TrialArgs,
    #[arg(long = "algo", default_values_t = ["msbl".to_string(), "linear-tv:1".to_string(), "log-tv:1:0.01".to_string()])]
    algorithms: Vec<String>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    trial: TrialArgs,
    /// Output directory (created if missing)
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    dictionary: PathBuf,
    #[arg(long)]
    measurements: PathBuf,
    /// Noise variance λ
    #[arg(long)]
    lambda: f64,
    #[arg(long = "algo", default_value = "log-tv:1:0.01")]
    algorithm: String,
    /// Where to write the N × L posterior means (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long, default_value = "homogeneous")]
    class: SparsityClass,
    #[arg(long, default_value = "0,10,20")]
    snr: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_algorithms(specs: &[String]) -> Result<Vec<AlgorithmSpec>> {
    specs.iter().map(|s| s.parse()).collect()
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if args.quick => ExperimentConfig::quick(),
        None => ExperimentConfig::default(),
    };
    if args.quick && args.config.is_some() {
        cfg.trials = 50;
        cfg.snr_grid_db = vec![0.0, 10.0, 20.0];
    }
    if let Some(s) = &args.snr {
        cfg.snr_grid_db = bench::parse_snr_grid(s)?;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(c) = &args.classes {
        cfg.set("classes", c)?;
    }
    if !args.algorithms.is_empty() {
        cfg.algorithms = parse_algorithms(&args.algorithms)?;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if args.out.is_some() {
        cfg.output_path = args.out;
    }
    if args.records.is_some() {
        cfg.records_path = args.records;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    cfg.record_timing |= args.timing;
    cfg.fix_dictionary |= args.fix_dictionary;

    let records = bench::run_experiment(&cfg)?;
    if let Some(path) = &cfg.records_path {
        bench::write_records(path, &records)?;
    }
    let rows = bench::aggregate(&records);
    match &cfg.output_path {
        Some(path) => bench::write_aggregate(path, &rows)?,
        None => {
            bench::write_aggregate_to(io::stdout().lock(), &rows).map_err(|source| Error::Csv {
                path: "<stdout>".into(),
                source,
            })?
        }
    }
    for r in &rows {
        eprintln!(
            "{:<12} {:>5.1} dB  {:<18} median NMSE {:>10}  F1 {:>6}  failed {}",
            r.class.tag(),
            r.snr_db,
            r.algorithm,
            fmt_opt(r.nmse_median, 5),
            fmt_opt(r.f1_mean, 3),
            r.failed
        );
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or("-".into(), |x| format!("{x:.digits$}"))
}

fn trial_spec(t: &TrialArgs) -> tvsbl::TrialSpec {
    tvsbl::TrialSpec {
        class: t.class,
        n: t.n,
        m: t.m,
        l: t.l,
        k: tvsbl::signal_gen::SUPPORT_SIZE,
        snr_db: t.snr,
    }
}

fn generate(t: &TrialArgs) -> Result<tvsbl::signal_gen::Trial> {
    let seed = bench::data_seed(t.seed, t.class, 0);
    trial_spec(t).generate(seed, bench::noise_seed(seed, t.snr))
}

fn profile_line(gamma: &[f64]) -> String {
    const LEVELS: [char; 8] = ['▁', '▂', '▃', '▄', '▅', '▆', '▇', '█'];
    let max = gamma.iter().fold(0.0f64, |m, g| m.max(*g));
    gamma
        .iter()
        .map(|&g| {
            if g == 0.0 || max == 0.0 {
                '·'
            } else {
                LEVELS[((g / max) * 7.0).round() as usize]
            }
        })
        .collect()
}

fn demo(args: DemoArgs) -> Result<()> {
    let data = generate(&args.trial)?;
    let algos = parse_algorithms(&args.algorithms)?;
    let truth_power: Vec<f64> = data
        .truth
        .x
        .row_iter()
        .map(|r| r.norm_squared() / r.len() as f64)
        .collect();
    println!(
        "class {}  SNR {} dB  λ = {:.3e}  blocks {:?}",
        args.trial.class,
        args.trial.snr,
        data.measurements.noise_variance(),
        data.truth.pattern.blocks()
    );
    println!("{:<18} {}", "truth", profile_line(&truth_power));
    for alg in &algos {
        let report = bench::run_algorithm(alg, &data.dictionary, &data.measurements)?;
        let means = &report.posterior.means;
        let support = top_k_support(means, data.truth.support.len())?;
        println!("{:<18} {}", alg.name, profile_line(&report.gamma_final));
        println!(
            "{:<18} NMSE {:.5}  F1 {:.3}  outer iterations {}  support {:?}",
            "",
            nmse(means, &data.truth.x)?,
            f1_score(&support, &data.truth.support),
            report.outer_iters_used,
            support
        );
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let data = generate(&args.trial)?;
    fs::create_dir_all(&args.dir).map_err(|e| Error::io(&args.dir, e))?;
    write_matrix(args.dir.join("A.txt"), data.dictionary.matrix())?;
    write_matrix(args.dir.join("X.txt"), &data.truth.x)?;
    write_matrix(args.dir.join("Y.txt"), data.measurements.y())?;
    let meta = format!(
        "class = {}\nsnr_db = {}\nnoise_variance = {:e}\nblocks = {}\n",
        args.trial.class,
        args.trial.snr,
        data.measurements.noise_variance(),
        data.truth
            .pattern
            .blocks()
            .iter()
            .map(|(s, l)| format!("{s}+{l}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let meta_path = args.dir.join("meta.txt");
    fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
    eprintln!(
        "wrote A.txt, X.txt, Y.txt and meta.txt to {}",
        args.dir.display()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let a = Dictionary::new(read_matrix(&args.dictionary)?)?;
    let y = MeasurementSet::new(read_matrix(&args.measurements)?, args.lambda)?;
    let alg: AlgorithmSpec = args.algorithm.parse()?;
    let report = bench::run_algorithm(&alg, &a, &y)?;
    eprintln!(
        "{}: {} outer iterations, converged {}, final cost {:.6e}",
        alg.name,
        report.outer_iters_used,
        report.converged,
        report.cost_trace.last().copied().unwrap_or(f64::NAN)
    );
    eprintln!("γ profile {}", profile_line(&report.gamma_final));
    match &args.out {
        Some(path) => write_matrix(path, &report.posterior.means),
        None => {
            let means: &DMatrix<f64> = &report.posterior.means;
            print!("{}", tvsbl::io::format_matrix(means));
            Ok(())
        }
    }
}

fn tune(args: TuneArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        snr_grid_db: bench::parse_snr_grid(&args.snr)?,
        trials: args.trials,
        master_seed: args.seed,
        threads: args.threads,
        ..ExperimentConfig::default()
    };
    let (linear, log) = bench::default_grid();
    for (label, grid) in [("linear", linear), ("log", log)] {
        let entries = bench::grid_search(&cfg, args.class, &grid)?;
        println!("{label} TV on {} ({} trials):", args.class, args.trials);
        for e in &entries {
            let medians: Vec<String> = e.median_nmse.iter().map(|v| format!("{v:.4}")).collect();
            println!(
                "  {:<16} score {:>7.2} dB  medians [{}]  failed {}",
                e.regularizer.to_string(),
                e.score_db,
                medians.join(", "),
                e.failed
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Demo(a) => demo(a),
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Tune(a) => tune(a),
    };
    match result {
        Ok(()) => {
            let _ = io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
