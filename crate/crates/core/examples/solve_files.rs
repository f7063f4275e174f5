//! Round trip through matrix files: write a problem, read it back, solve it.
//!
//! cargo run --release --example solve_files -- [directory]

use std::path::PathBuf;

use tvsbl::bench::{data_seed, noise_seed};
use tvsbl::io::{read_matrix, write_matrix};
use tvsbl::{
    nmse, tv_sbl, Dictionary, MeasurementSet, SolverOptions, SparsityClass, TrialSpec,
    TvRegularizer,
};

fn main() -> tvsbl::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("tvsbl-files"), PathBuf::from);
    std::fs::create_dir_all(&dir).map_err(|e| tvsbl::Error::io(&dir, e))?;

    let spec = TrialSpec::reference(SparsityClass::Hybrid, 20.0);
    let seed = data_seed(7, spec.class, 0);
    let trial = spec.generate(seed, noise_seed(seed, spec.snr_db))?;
    write_matrix(dir.join("A.txt"), trial.dictionary.matrix())?;
    write_matrix(dir.join("Y.txt"), trial.measurements.y())?;
    write_matrix(dir.join("X.txt"), &trial.truth.x)?;
    let lambda = trial.measurements.noise_variance();

    let a = Dictionary::new(read_matrix(dir.join("A.txt"))?)?;
    let y = MeasurementSet::new(read_matrix(dir.join("Y.txt"))?, lambda)?;
    let report = tv_sbl(
        &a,
        &y,
        &TvRegularizer::log(1.0, 0.01)?,
        &SolverOptions::default(),
    )?;
    write_matrix(dir.join("X_hat.txt"), &report.posterior.means)?;

    let x = read_matrix(dir.join("X.txt"))?;
    println!("files in {}", dir.display());
    println!(
        "NMSE of X_hat.txt against X.txt: {:.5}",
        nmse(&report.posterior.means, &x)?
    );
    Ok(())
}
