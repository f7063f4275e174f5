//! Recover one block-sparse signal ensemble with Log-TV SBL.
//!
//! cargo run --release --example quickstart

use tvsbl::bench::{data_seed, noise_seed};
use tvsbl::{
    f1_score, nmse, top_k_support, tv_sbl, SolverOptions, SparsityClass, TrialSpec, TvRegularizer,
};

fn main() -> tvsbl::Result<()> {
    let spec = TrialSpec::reference(SparsityClass::Homogeneous, 15.0);
    let seed = data_seed(0, spec.class, 0);
    let trial = spec.generate(seed, noise_seed(seed, spec.snr_db))?;

    let reg = TvRegularizer::log(1.0, 0.01)?;
    let report = tv_sbl(
        &trial.dictionary,
        &trial.measurements,
        &reg,
        &SolverOptions::default(),
    )?;

    let x_hat = &report.posterior.means;
    let support = top_k_support(x_hat, spec.k)?;
    println!("true blocks      {:?}", trial.truth.pattern.blocks());
    println!("estimated rows   {support:?}");
    println!("NMSE             {:.4}", nmse(x_hat, &trial.truth.x)?);
    println!(
        "F1               {:.3}",
        f1_score(&support, &trial.truth.support)
    );
    println!(
        "outer iterations {} (converged: {})",
        report.outer_iters_used, report.converged
    );
    Ok(())
}
