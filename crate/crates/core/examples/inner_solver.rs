//! The convex subproblem of one outer iteration, solved by both inner methods.
//!
//! cargo run --release --example inner_solver

use std::time::Instant;

use tvsbl::bench::{data_seed, noise_seed};
use tvsbl::inner::{InnerMethod, Subproblem};
use tvsbl::mm::logdet_majorizer_weights;
use tvsbl::{InnerOptions, SparsityClass, TrialSpec, TvRegularizer};

fn main() -> tvsbl::Result<()> {
    let spec = TrialSpec {
        n: 60,
        ..TrialSpec::reference(SparsityClass::Homogeneous, 10.0)
    };
    let seed = data_seed(3, spec.class, 0);
    let trial = spec.generate(seed, noise_seed(seed, spec.snr_db))?;
    let (a, y) = (&trial.dictionary, &trial.measurements);

    let gamma0 = vec![1.0; spec.n];
    let w = logdet_majorizer_weights(a, &gamma0, y.noise_variance())?;
    let reg = TvRegularizer::log(1.0, 0.01)?;
    let u = reg.edge_weights(&gamma0);
    let sub = Subproblem::new(a, y, &w, &u, reg.beta(), 1e-10)?;

    for method in [InnerMethod::ActiveSet, InnerMethod::Variational] {
        let opts = InnerOptions {
            method,
            ..InnerOptions::default()
        };
        let start = Instant::now();
        match sub.solve(&gamma0, &opts) {
            Ok((gamma, diag)) => println!(
                "{method:?}: objective {:.6} -> {:.6}, KKT {:.1e} (tolerance {:.1e}), {} iterations, {:.3}s, {} nonzeros",
                diag.objective_trace[0],
                sub.objective(&gamma)?,
                diag.kkt_residual,
                opts.kkt_tol * diag.kkt_scale,
                diag.mid_iters,
                start.elapsed().as_secs_f64(),
                gamma.iter().filter(|g| **g > 1e-10).count()
            ),
            Err(e) => println!("{method:?}: {e}"),
        }
    }
    Ok(())
}
