//! Gaussian MMV measurement model with a diagonal row-variance prior.
//!
//! Every snapshot obeys `y_l = A x_l + n_l` with `n_l ~ N(0, λI)` and
//! `x_l ~ N(0, Γ)`, `Γ = diag(γ)`. The marginal covariance of a snapshot is
//! `Σ_y = λI + AΓAᵀ`, and every quantity here is evaluated through a Cholesky
//! factor of `Σ_y`. The posterior is always formed in its Γ-multiplied form
//! (`Σ_x = Γ − ΓAᵀΣ_y⁻¹AΓ`, `μ = ΓAᵀΣ_y⁻¹y`) so that exact zeros in γ never
//! require inverting Γ.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{ensure_finite, Error, Result};
use crate::regularizers::TvRegularizer;

/// Sensing matrix `A` (M × N).
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    entries: DMatrix<f64>,
}

impl Dictionary {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidInput(
                "dictionary must be at least 1x1".into(),
            ));
        }
        ensure_finite("dictionary", entries.iter())?;
        Ok(Self { entries })
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} dictionary",
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Number of measurements `M`.
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of atoms `N`.
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.entries.column_iter().map(|c| c.norm()).collect()
    }

    /// Dictionary with columns in reverse order.
    pub fn reversed_columns(&self) -> Self {
        let n = self.cols();
        let entries = DMatrix::from_fn(self.rows(), n, |r, c| self.entries[(r, n - 1 - c)]);
        Self { entries }
    }
}

/// Observations `Y` (M × L) together with the known noise variance λ.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    y: DMatrix<f64>,
    noise_variance: f64,
}

impl MeasurementSet {
    pub fn new(y: DMatrix<f64>, noise_variance: f64) -> Result<Self> {
        if y.nrows() == 0 || y.ncols() == 0 {
            return Err(Error::InvalidInput(
                "measurements need at least one row and one snapshot".into(),
            ));
        }
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        ensure_finite("measurements", y.iter())?;
        Ok(Self { y, noise_variance })
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn snapshots(&self) -> usize {
        self.y.ncols()
    }

    pub fn rows(&self) -> usize {
        self.y.nrows()
    }

    /// Same observations under a different noise variance.
    pub fn with_noise_variance(&self, noise_variance: f64) -> Result<Self> {
        Self::new(self.y.clone(), noise_variance)
    }
}

/// Row variances γ ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters(Vec<f64>);

impl Hyperparameters {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidInput("gamma must not be empty".into()));
        }
        ensure_finite("gamma", gamma.iter())?;
        if let Some(v) = gamma.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "gamma must be nonnegative, found {v}"
            )));
        }
        Ok(Self(gamma))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Hyperparameters {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Posterior moments of the signal rows given `Y` and γ.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// N × L, one posterior mean per snapshot.
    pub means: DMatrix<f64>,
    /// N × N, shared by every snapshot.
    pub covariance: DMatrix<f64>,
}

/// Cholesky factor of `Σ_y = λI + AΓAᵀ`.
pub(crate) struct CovarianceFactor {
    chol: Cholesky<f64, Dyn>,
}

impl CovarianceFactor {
    pub(crate) fn new(a: &DMatrix<f64>, gamma: &[f64], lambda: f64) -> Result<Self> {
        let sigma = covariance_matrix(a, gamma, lambda);
        let chol = Cholesky::new(sigma).ok_or_else(|| {
            Error::Numerical("measurement covariance is not positive definite".into())
        })?;
        Ok(Self { chol })
    }

    pub(crate) fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }

    pub(crate) fn log_det(&self) -> f64 {
        2.0 * self
            .chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d.ln())
            .sum::<f64>()
    }
}

fn covariance_matrix(a: &DMatrix<f64>, gamma: &[f64], lambda: f64) -> DMatrix<f64> {
    let mut scaled = a.clone();
    for (mut col, &g) in scaled.column_iter_mut().zip(gamma) {
        col *= g;
    }
    let mut sigma = &scaled * a.transpose();
    for i in 0..sigma.nrows() {
        sigma[(i, i)] += lambda;
    }
    // the product is symmetric up to rounding; the factorization only reads one triangle
    sigma
}

fn check_gamma(a: &Dictionary, gamma: &[f64]) -> Result<()> {
    if gamma.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "gamma has {} entries, dictionary has {} columns",
            gamma.len(),
            a.cols()
        )));
    }
    ensure_finite("gamma", gamma.iter())?;
    if gamma.iter().any(|g| *g < 0.0) {
        return Err(Error::InvalidInput("gamma must be nonnegative".into()));
    }
    Ok(())
}

fn check_measurements(a: &Dictionary, y: &MeasurementSet) -> Result<()> {
    if y.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "measurements have {} rows, dictionary has {}",
            y.rows(),
            a.rows()
        )));
    }
    Ok(())
}

/// `Σ_y = λI + A·diag(γ)·Aᵀ`.
pub fn measurement_covariance(
    a: &Dictionary,
    gamma: &Hyperparameters,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    check_gamma(a, gamma.as_slice())?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(covariance_matrix(a.matrix(), gamma.as_slice(), lambda))
}

/// Posterior means `ΓAᵀΣ_y⁻¹Y` without forming the N × N covariance.
pub(crate) fn posterior_means_raw(
    a: &DMatrix<f64>,
    y: &DMatrix<f64>,
    gamma: &[f64],
    factor: &CovarianceFactor,
) -> DMatrix<f64> {
    let mut means = a.transpose() * factor.solve(y);
    for (mut row, &g) in means.row_iter_mut().zip(gamma) {
        row *= g;
    }
    means
}

/// Posterior means and covariance of every snapshot.
pub fn posterior(a: &Dictionary, y: &MeasurementSet, gamma: &Hyperparameters) -> Result<Posterior> {
    check_measurements(a, y)?;
    check_gamma(a, gamma.as_slice())?;
    let g = gamma.as_slice();
    let factor = CovarianceFactor::new(a.matrix(), g, y.noise_variance())?;
    let means = posterior_means_raw(a.matrix(), y.y(), g, &factor);

    // Γ − ΓAᵀΣ_y⁻¹AΓ
    let at_si_a = a.matrix().transpose() * factor.solve(a.matrix());
    let n = a.cols();
    let mut covariance = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            covariance[(i, j)] = -g[i] * at_si_a[(i, j)] * g[j];
        }
        covariance[(j, j)] += g[j];
    }
    covariance = (&covariance + covariance.transpose()) * 0.5;
    Ok(Posterior { means, covariance })
}

/// `L·log|Σ_y| + Σ_l y_lᵀΣ_y⁻¹y_l`, the negative log evidence up to constants.
pub(crate) fn evidence_terms(
    a: &DMatrix<f64>,
    y: &DMatrix<f64>,
    gamma: &[f64],
    lambda: f64,
) -> Result<(f64, f64)> {
    let factor = CovarianceFactor::new(a, gamma, lambda)?;
    let si_y = factor.solve(y);
    let quad = y.component_mul(&si_y).sum();
    Ok((y.ncols() as f64 * factor.log_det(), quad))
}

/// Type-II cost `L·log|Σ_y| + Σ_l y_lᵀΣ_y⁻¹y_l + β·T(γ)`.
pub fn sbl_cost(
    a: &Dictionary,
    y: &MeasurementSet,
    gamma: &Hyperparameters,
    reg: &TvRegularizer,
) -> Result<f64> {
    check_measurements(a, y)?;
    check_gamma(a, gamma.as_slice())?;
    let (log_det, quad) = evidence_terms(a.matrix(), y.y(), gamma.as_slice(), y.noise_variance())?;
    Ok(log_det + quad + reg.penalty(gamma.as_slice()))
}
