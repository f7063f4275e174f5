//! Recovery scores: normalized squared error and F1 of the estimated support.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `‖X̂ − X‖²_F / ‖X‖²_F`.
pub fn nmse(x_hat: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<f64> {
    if x_hat.shape() != x.shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {:?}, ground truth is {:?}",
            x_hat.shape(),
            x.shape()
        )));
    }
    let energy = x.norm_squared();
    if energy == 0.0 {
        return Err(Error::InvalidInput(
            "NMSE is undefined for an all-zero ground truth".into(),
        ));
    }
    Ok((x_hat - x).norm_squared() / energy)
}

/// Indices of the `k` rows with the largest Euclidean norm, sorted
/// ascending. Equal norms are resolved in favour of the lower index.
pub fn top_k_support(x_hat: &DMatrix<f64>, k: usize) -> Result<Vec<usize>> {
    if k > x_hat.nrows() {
        return Err(Error::InvalidInput(format!(
            "K = {k} exceeds {} rows",
            x_hat.nrows()
        )));
    }
    let norms: Vec<f64> = x_hat.row_iter().map(|r| r.norm_squared()).collect();
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let mut picked = order[..k].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Rows whose norm exceeds `threshold`.
pub fn threshold_support(x_hat: &DMatrix<f64>, threshold: f64) -> Vec<usize> {
    x_hat
        .row_iter()
        .enumerate()
        .filter(|(_, r)| r.norm() > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Harmonic mean of precision and recall; zero when nothing is recovered.
pub fn f1_score(estimated: &[usize], truth: &[usize]) -> f64 {
    let est: BTreeSet<usize> = estimated.iter().copied().collect();
    let tru: BTreeSet<usize> = truth.iter().copied().collect();
    let tp = est.intersection(&tru).count();
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / est.len() as f64;
    let recall = tp as f64 / tru.len() as f64;
    2.0 * precision * recall / (precision + recall)
}
