//! M-SBL, Linear TV and Log TV on the same data, one trial per sparsity class.
//!
//! cargo run --release --example compare_regularizers -- [snr_db] [seed]

use tvsbl::bench::{data_seed, noise_seed, run_algorithm, AlgorithmSpec, Method};
use tvsbl::{f1_score, nmse, top_k_support, SparsityClass, TrialSpec, TvRegularizer};

fn bar(gamma: &[f64]) -> String {
    let max = gamma.iter().cloned().fold(0.0, f64::max);
    gamma
        .iter()
        .map(|&g| match g / max {
            r if r > 0.5 => '#',
            r if r > 0.1 => '+',
            r if r > 1e-3 => '.',
            _ => ' ',
        })
        .collect()
}

fn main() -> tvsbl::Result<()> {
    let mut args = std::env::args().skip(1);
    let snr: f64 = args.next().map_or(10.0, |s| s.parse().expect("snr_db"));
    let master: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let algorithms = [
        AlgorithmSpec::new(Method::Msbl),
        AlgorithmSpec::new(Method::TvSbl(TvRegularizer::Linear { beta: 3.0 })),
        AlgorithmSpec::new(Method::TvSbl(TvRegularizer::Log {
            beta: 1.0,
            epsilon: 0.01,
        })),
    ];
    for class in SparsityClass::ALL {
        let spec = TrialSpec::reference(class, snr);
        let seed = data_seed(master, class, 0);
        let trial = spec.generate(seed, noise_seed(seed, snr))?;
        let truth: Vec<f64> = trial.truth.x.row_iter().map(|r| r.norm_squared()).collect();
        println!("{class} at {snr} dB");
        println!("  {:<14} |{}|", "truth", bar(&truth));
        for alg in &algorithms {
            let report = run_algorithm(alg, &trial.dictionary, &trial.measurements)?;
            let x_hat = &report.posterior.means;
            let support = top_k_support(x_hat, spec.k)?;
            println!(
                "  {:<14} |{}| NMSE {:.4} F1 {:.2}",
                alg.name,
                bar(&report.gamma_final),
                nmse(x_hat, &trial.truth.x)?,
                f1_score(&support, &trial.truth.support)
            );
        }
    }
    Ok(())
}
