//! Unregularized M-SBL reference via expectation-maximization.

use crate::error::{Error, Result};
use crate::mm::{report, SolveReport, SolverOptions};
use crate::model::{
    posterior_means_raw, sbl_cost, CovarianceFactor, Dictionary, Hyperparameters, MeasurementSet,
};
use crate::regularizers::TvRegularizer;

/// M-SBL by EM: `γᵢ ← (1/L)·Σ_l μ_{l,i}² + [Σ_x]ᵢᵢ`.
///
/// Uses the same initialization, floor and relative-change stopping rule as
/// [`crate::mm::tv_sbl`]; `lambda` overrides the variance stored in `y`.
pub fn msbl_em(
    a: &Dictionary,
    y: &MeasurementSet,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let n = a.cols();
    opts.validate(n)?;
    if y.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "measurements have {} rows, dictionary has {}",
            y.rows(),
            a.rows()
        )));
    }
    let y = if lambda == y.noise_variance() {
        y.clone()
    } else {
        y.with_noise_variance(lambda)?
    };
    let mat = a.matrix();
    let l = y.snapshots() as f64;
    let floor = opts.gamma_floor;

    let mut gamma = opts.initial_gamma(n);
    let mut trace = vec![sbl_cost(
        a,
        &y,
        &Hyperparameters::new(gamma.clone())?,
        &TvRegularizer::None,
    )?];
    let mut converged = false;
    let mut used = 0;
    for _ in 0..opts.max_outer_iters {
        used += 1;
        let factor = CovarianceFactor::new(mat, &gamma, lambda)?;
        let means = posterior_means_raw(mat, y.y(), &gamma, &factor);
        let si_a = factor.solve(mat);
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let quad = mat.column(i).dot(&si_a.column(i));
                let var = gamma[i] - gamma[i] * gamma[i] * quad;
                (means.row(i).norm_squared() / l + var.max(0.0)).max(floor)
            })
            .collect();
        let norm = gamma.iter().map(|g| g * g).sum::<f64>().sqrt().max(1e-12);
        let change = gamma
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            / norm;
        gamma = next;
        trace.push(sbl_cost(
            a,
            &y,
            &Hyperparameters::new(gamma.clone())?,
            &TvRegularizer::None,
        )?);
        if change < opts.outer_tol {
            converged = true;
            break;
        }
    }
    report(a, &y, &gamma, floor, trace, used, converged, Vec::new())
}
