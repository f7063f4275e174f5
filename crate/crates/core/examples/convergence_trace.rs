//! Cost trace and inner diagnostics of the outer loop under custom options.
//!
//! cargo run --release --example convergence_trace

use tvsbl::bench::{data_seed, noise_seed};
use tvsbl::{
    tv_sbl, GammaInit, InnerOptions, SolverOptions, SparsityClass, TrialSpec, TvRegularizer,
};

fn main() -> tvsbl::Result<()> {
    let spec = TrialSpec::reference(SparsityClass::Hybrid, 15.0);
    let seed = data_seed(11, spec.class, 0);
    let trial = spec.generate(seed, noise_seed(seed, spec.snr_db))?;
    let (a, y) = (&trial.dictionary, &trial.measurements);

    let opts = SolverOptions {
        max_outer_iters: 50,
        outer_tol: 1e-6,
        gamma_init: GammaInit::Values(vec![0.1; spec.n]),
        inner: InnerOptions {
            kkt_tol: 1e-7,
            ..InnerOptions::default()
        },
        ..SolverOptions::default()
    };
    let report = tv_sbl(a, y, &TvRegularizer::Linear { beta: 1.0 }, &opts)?;
    println!("{:>4} {:>14} {:>10} {:>6}", "iter", "cost", "KKT", "inner");
    for (j, cost) in report.cost_trace.iter().enumerate() {
        match j.checked_sub(1).and_then(|k| report.inner.get(k)) {
            Some(d) => println!(
                "{j:>4} {cost:>14.6} {:>10.1e} {:>6}",
                d.kkt_residual, d.mid_iters
            ),
            None => println!("{j:>4} {cost:>14.6}"),
        }
    }
    let active = report.gamma_final.iter().filter(|g| **g > 0.0).count();
    println!(
        "converged {}, {active} nonzero hyperparameters",
        report.converged
    );
    Ok(())
}
