//! Solver for the convex problem left after linearizing `log|Σ_y|`:
//!
//! ```text
//! minimize  L·Σ wᵢγᵢ + Σ_l y_lᵀ Σ_y(γ)⁻¹ y_l + β·Σ uᵢ|γ_{i+1} − γᵢ|   over γ ≥ floor
//! ```
//!
//! Two methods are available ([`InnerMethod`]):
//!
//! * `ActiveSet` (default) alternates Newton steps on the current piecewise
//!   structure of γ (runs of equal values move together, runs at the floor
//!   stay there) with diagonally scaled proximal-gradient steps that split,
//!   merge and release runs. Both work on the exact data-fit term, whose
//!   curvature stays bounded as γᵢ → 0.
//! * `Variational` replaces the data-fit term by its tight upper bound
//!   `r + Σ cᵢ/γᵢ` at the current point and minimizes the resulting
//!   separable-plus-TV problem by ADMM ([`separable_tv_min`]), refreshing the
//!   bound until γ settles, followed by the same Newton refinement.
//!
//! Either way the result is certified by [`Subproblem::kkt_residual`].

mod admm;
mod kkt;
mod polish;
mod prox;

use nalgebra::DMatrix;

pub use admm::{separable_tv_min, SeparableTvProblem};

use crate::error::{Error, Result};
use crate::model::{
    evidence_terms, posterior_means_raw, CovarianceFactor, Dictionary, MeasurementSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMethod {
    ActiveSet,
    Variational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOptions {
    pub method: InnerMethod,
    /// Iteration budget of the outer loop of either method.
    pub max_mid_iters: usize,
    /// Relative γ change that ends the mid loop.
    pub mid_tol: f64,
    pub admm_rho: f64,
    pub max_admm_iters: usize,
    pub admm_tol_primal: f64,
    pub admm_tol_dual: f64,
    /// Accepted KKT residual, relative to `max(1, L·max wᵢ)`.
    pub kkt_tol: f64,
    /// Newton refinement steps per attempt; 0 disables the refinement.
    pub polish_steps: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            method: InnerMethod::ActiveSet,
            max_mid_iters: 50,
            mid_tol: 1e-6,
            admm_rho: 1.0,
            max_admm_iters: 5000,
            admm_tol_primal: 1e-8,
            admm_tol_dual: 1e-8,
            kkt_tol: 1e-5,
            polish_steps: 30,
        }
    }
}

impl InnerOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mid_tol", self.mid_tol),
            ("admm_rho", self.admm_rho),
            ("admm_tol_primal", self.admm_tol_primal),
            ("admm_tol_dual", self.admm_tol_dual),
            ("kkt_tol", self.kkt_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_mid_iters == 0 || self.max_admm_iters == 0 {
            return Err(Error::InvalidInput(
                "iteration limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubproblemDiagnostics {
    /// Subproblem objective at the start and after every accepted update.
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
    /// The scale `max(1, L·max wᵢ)` the KKT tolerance is relative to.
    pub kkt_scale: f64,
    pub mid_iters: usize,
    pub admm_iters_total: usize,
    pub converged: bool,
}

/// Tight upper bound `Σ_l y_lᵀΣ_y(γ)⁻¹y_l ≤ r + Σ cᵢ/γᵢ`, exact at γ̃.
#[derive(Debug, Clone, PartialEq)]
pub struct DatafitBound {
    pub c: Vec<f64>,
    pub r: f64,
}

impl DatafitBound {
    pub fn evaluate(&self, gamma: &[f64]) -> f64 {
        self.r
            + self
                .c
                .iter()
                .zip(gamma)
                .map(|(c, g)| if *c == 0.0 { 0.0 } else { c / g })
                .sum::<f64>()
    }
}

/// Coefficients of the data-fit bound at `gamma_tilde`: `cᵢ = Σ_l μ_{l,i}²`
/// and `r = λ⁻¹·Σ_l ‖y_l − Aμ_l‖²` with μ the posterior means.
pub fn datafit_coefficients(
    a: &Dictionary,
    y: &MeasurementSet,
    gamma_tilde: &[f64],
) -> Result<DatafitBound> {
    if gamma_tilde.len() != a.cols() || y.rows() != a.rows() {
        return Err(Error::DimensionMismatch("datafit coefficients".into()));
    }
    let factor = CovarianceFactor::new(a.matrix(), gamma_tilde, y.noise_variance())?;
    let means = posterior_means_raw(a.matrix(), y.y(), gamma_tilde, &factor);
    Ok(datafit_from_means(a.matrix(), y, &means))
}

fn datafit_from_means(a: &DMatrix<f64>, y: &MeasurementSet, means: &DMatrix<f64>) -> DatafitBound {
    let c = means.row_iter().map(|r| r.norm_squared()).collect();
    let residual = y.y() - a * means;
    DatafitBound {
        c,
        r: residual.norm_squared() / y.noise_variance(),
    }
}

/// One instance of the convex subproblem.
#[derive(Debug, Clone, Copy)]
pub struct Subproblem<'a> {
    pub dictionary: &'a Dictionary,
    pub measurements: &'a MeasurementSet,
    /// Linearization weights `wᵢ = aᵢᵀΣ_y⁻¹aᵢ` of `log|Σ_y|`.
    pub logdet_weights: &'a [f64],
    /// Per-edge TV weights (ones for Linear TV).
    pub edge_weights: &'a [f64],
    pub beta: f64,
    pub gamma_floor: f64,
}

impl<'a> Subproblem<'a> {
    pub fn new(
        dictionary: &'a Dictionary,
        measurements: &'a MeasurementSet,
        logdet_weights: &'a [f64],
        edge_weights: &'a [f64],
        beta: f64,
        gamma_floor: f64,
    ) -> Result<Self> {
        let s = Self {
            dictionary,
            measurements,
            logdet_weights,
            edge_weights,
            beta,
            gamma_floor,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dictionary.cols();
        if self.measurements.rows() != self.dictionary.rows() {
            return Err(Error::DimensionMismatch(format!(
                "measurements have {} rows, dictionary has {}",
                self.measurements.rows(),
                self.dictionary.rows()
            )));
        }
        if self.logdet_weights.len() != n || self.edge_weights.len() + 1 != n {
            return Err(Error::DimensionMismatch(format!(
                "{} logdet weights and {} edge weights for {n} atoms",
                self.logdet_weights.len(),
                self.edge_weights.len()
            )));
        }
        if self
            .logdet_weights
            .iter()
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::InvalidInput(
                "logdet weights must be positive".into(),
            ));
        }
        if self
            .edge_weights
            .iter()
            .any(|u| !(u.is_finite() && *u >= 0.0))
        {
            return Err(Error::InvalidInput(
                "edge weights must be nonnegative".into(),
            ));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if !(self.gamma_floor.is_finite() && self.gamma_floor >= 0.0) {
            return Err(Error::InvalidInput(
                "gamma floor must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    fn snapshots(&self) -> f64 {
        self.measurements.snapshots() as f64
    }

    fn check_gamma(&self, gamma: &[f64]) -> Result<()> {
        if gamma.len() != self.dictionary.cols() {
            return Err(Error::DimensionMismatch(format!(
                "gamma has {} entries, expected {}",
                gamma.len(),
                self.dictionary.cols()
            )));
        }
        if gamma.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidInput(
                "gamma must be nonnegative and finite".into(),
            ));
        }
        Ok(())
    }

    /// Subproblem objective at `gamma`.
    pub fn objective(&self, gamma: &[f64]) -> Result<f64> {
        self.check_gamma(gamma)?;
        let (_, quad) = evidence_terms(
            self.dictionary.matrix(),
            self.measurements.y(),
            gamma,
            self.measurements.noise_variance(),
        )?;
        let linear: f64 = self
            .logdet_weights
            .iter()
            .zip(gamma)
            .map(|(w, g)| w * g)
            .sum();
        let tv: f64 = gamma
            .windows(2)
            .zip(self.edge_weights)
            .map(|(p, u)| u * (p[1] - p[0]).abs())
            .sum();
        Ok(self.snapshots() * linear + quad + self.beta * tv)
    }

    /// Gradient of the smooth part: `L·wᵢ − Σ_l (aᵢᵀΣ_y⁻¹y_l)²`.
    pub fn smooth_gradient(&self, gamma: &[f64]) -> Result<Vec<f64>> {
        self.check_gamma(gamma)?;
        let a = self.dictionary.matrix();
        let factor = CovarianceFactor::new(a, gamma, self.measurements.noise_variance())?;
        let p = a.transpose() * factor.solve(self.measurements.y());
        let l = self.snapshots();
        Ok(p.row_iter()
            .zip(self.logdet_weights)
            .map(|(row, w)| l * w - row.norm_squared())
            .collect())
    }

    /// Norm of the minimal-norm subgradient of the objective at `gamma`, with
    /// the bound `γᵢ ≥ floor` treated as active where `γᵢ ≤ floor`.
    pub fn kkt_residual(&self, gamma: &[f64]) -> Result<f64> {
        let smooth = self.smooth_gradient(gamma)?;
        Ok(kkt::minimal_subgradient_norm(
            &smooth,
            gamma,
            self.edge_weights,
            self.beta,
            self.gamma_floor,
        ))
    }

    /// `max(1, L·max wᵢ)`, the natural size of the smooth gradient.
    pub fn kkt_scale(&self) -> f64 {
        let wmax = self.logdet_weights.iter().fold(0.0f64, |m, w| m.max(*w));
        (self.snapshots() * wmax).max(1.0)
    }

    /// Minimizes the subproblem starting from `gamma_init`.
    ///
    /// The returned objective never exceeds the objective at `gamma_init`
    /// (clamped to the floor). Fails with [`Error::SubproblemNotConverged`]
    /// if the KKT certificate is not met at exit.
    pub fn solve(
        &self,
        gamma_init: &[f64],
        opts: &InnerOptions,
    ) -> Result<(Vec<f64>, SubproblemDiagnostics)> {
        opts.validate()?;
        self.check_gamma(gamma_init)?;
        let scale = self.kkt_scale();
        let tol = opts.kkt_tol * scale;
        let gamma: Vec<f64> = gamma_init.iter().map(|g| g.max(self.gamma_floor)).collect();
        let obj = self.objective(&gamma)?;
        let mut diag = SubproblemDiagnostics {
            objective_trace: vec![obj],
            kkt_scale: scale,
            ..Default::default()
        };
        let gamma = match opts.method {
            InnerMethod::ActiveSet => self.run_active_set(gamma, obj, tol, opts, &mut diag)?,
            InnerMethod::Variational => self.run_variational(gamma, obj, tol, opts, &mut diag)?,
        };
        diag.converged = diag.kkt_residual <= tol;
        if !diag.converged {
            return Err(Error::SubproblemNotConverged {
                diagnostics: Box::new(diag),
                tolerance: tol,
            });
        }
        Ok((gamma, diag))
    }

    fn run_active_set(
        &self,
        mut gamma: Vec<f64>,
        mut obj: f64,
        tol: f64,
        opts: &InnerOptions,
        diag: &mut SubproblemDiagnostics,
    ) -> Result<Vec<f64>> {
        let mut alpha = 1.0;
        diag.kkt_residual = f64::INFINITY;
        for it in 0..opts.max_mid_iters {
            diag.mid_iters = it + 1;
            if opts.polish_steps > 0 {
                if let Some((p, pobj)) = polish::polish(self, &gamma, opts.polish_steps)? {
                    gamma = p;
                    obj = pobj;
                    diag.objective_trace.push(obj);
                }
            }
            diag.kkt_residual = self.kkt_residual(&gamma)?;
            if diag.kkt_residual <= tol {
                break;
            }
            match self.scaled_gradient_step(&gamma, obj, &mut alpha)? {
                Some((next, nobj)) => {
                    gamma = next;
                    obj = nobj;
                    diag.objective_trace.push(obj);
                }
                None => break,
            }
        }
        if !diag.kkt_residual.is_finite()
            || diag.objective_trace.len() > 1 && diag.kkt_residual > tol
        {
            diag.kkt_residual = self.kkt_residual(&gamma)?;
        }
        Ok(gamma)
    }

    /// One proximal-gradient step in the metric `α·diag(∇²)`, with `α`
    /// increased until the objective decreases sufficiently. Returns `None`
    /// when no decrease is found.
    fn scaled_gradient_step(
        &self,
        gamma: &[f64],
        obj: f64,
        alpha: &mut f64,
    ) -> Result<Option<(Vec<f64>, f64)>> {
        let a = self.dictionary.matrix();
        let factor = CovarianceFactor::new(a, gamma, self.measurements.noise_variance())?;
        let si_a = factor.solve(a);
        let p = a.transpose() * factor.solve(self.measurements.y());
        let l = self.snapshots();
        let n = gamma.len();
        let mut grad = vec![0.0; n];
        let mut curv = vec![0.0; n];
        for i in 0..n {
            let pi = p.row(i).norm_squared();
            grad[i] = l * self.logdet_weights[i] - pi;
            curv[i] = 2.0 * a.column(i).dot(&si_a.column(i)) * pi;
        }
        let cmax = curv.iter().fold(0.0f64, |m, c| m.max(*c));
        let cmin = (1e-8 * cmax).max(1e-300);
        let tau: Vec<f64> = self.edge_weights.iter().map(|u| self.beta * u).collect();

        let mut first = true;
        for _ in 0..40 {
            let d: Vec<f64> = curv.iter().map(|c| *alpha * c.max(cmin)).collect();
            let v: Vec<f64> = (0..n).map(|i| gamma[i] - grad[i] / d[i]).collect();
            let x = prox::weighted_tv_prox(&v, &d, &tau, self.gamma_floor);
            let moved: f64 = (0..n).map(|i| d[i] * (x[i] - gamma[i]).powi(2)).sum();
            if moved == 0.0 {
                return Ok(None);
            }
            let value = self.objective(&x)?;
            if value <= obj - 1e-4 * 0.5 * moved {
                if first {
                    *alpha = (*alpha * 0.5).max(1e-6);
                }
                return Ok(Some((x, value)));
            }
            first = false;
            *alpha *= 4.0;
        }
        Ok(None)
    }

    fn run_variational(
        &self,
        mut gamma: Vec<f64>,
        mut obj: f64,
        tol: f64,
        opts: &InnerOptions,
        diag: &mut SubproblemDiagnostics,
    ) -> Result<Vec<f64>> {
        let a = self.dictionary.matrix();
        let lambda = self.measurements.noise_variance();
        let floor = self.gamma_floor;
        let mut state = None;
        let mut kkt = f64::INFINITY;

        for mid in 0..opts.max_mid_iters {
            diag.mid_iters = mid + 1;
            let factor = CovarianceFactor::new(a, &gamma, lambda)?;
            let means = posterior_means_raw(a, self.measurements.y(), &gamma, &factor);
            let bound = datafit_from_means(a, self.measurements, &means);
            let problem = SeparableTvProblem {
                w: self.logdet_weights.to_vec(),
                c: bound.c,
                u: self.edge_weights.to_vec(),
                beta: self.beta,
                snapshots: self.measurements.snapshots(),
                gamma_floor: floor,
            };
            let out = admm::solve_admm(&problem, &gamma, opts, &mut state);
            diag.admm_iters_total += out.iterations;

            let cand_obj = self.objective(&out.gamma)?;
            let mut change = 0.0;
            let stalled = cand_obj.is_nan() || cand_obj > obj;
            if !stalled {
                let norm = gamma.iter().map(|g| g * g).sum::<f64>().sqrt().max(1e-12);
                change = gamma
                    .iter()
                    .zip(&out.gamma)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
                    / norm;
                gamma = out.gamma;
                if cand_obj < obj {
                    obj = cand_obj;
                    diag.objective_trace.push(obj);
                }
            }

            let last = mid + 1 == opts.max_mid_iters;
            if stalled || change < 1e-3 || last {
                if opts.polish_steps > 0 {
                    if let Some((p, pobj)) = polish::polish(self, &gamma, opts.polish_steps)? {
                        if pobj <= obj {
                            gamma = p;
                            obj = pobj;
                            diag.objective_trace.push(obj);
                            // the ADMM splitting no longer matches the iterate
                            state = None;
                        }
                    }
                }
                kkt = self.kkt_residual(&gamma)?;
                if kkt <= tol || stalled {
                    break;
                }
            }
            if change < opts.mid_tol {
                break;
            }
        }
        if !kkt.is_finite() {
            kkt = self.kkt_residual(&gamma)?;
        }
        diag.kkt_residual = kkt;
        Ok(gamma)
    }
}

/// Solves the subproblem; see [`Subproblem::solve`].
#[allow(clippy::too_many_arguments)]
pub fn solve_subproblem(
    a: &Dictionary,
    y: &MeasurementSet,
    logdet_weights: &[f64],
    edge_weights: &[f64],
    beta: f64,
    gamma_init: &[f64],
    gamma_floor: f64,
    opts: &InnerOptions,
) -> Result<(Vec<f64>, SubproblemDiagnostics)> {
    Subproblem::new(a, y, logdet_weights, edge_weights, beta, gamma_floor)?.solve(gamma_init, opts)
}

/// KKT residual of the subproblem at `gamma`; see [`Subproblem::kkt_residual`].
pub fn kkt_residual(
    a: &Dictionary,
    y: &MeasurementSet,
    logdet_weights: &[f64],
    edge_weights: &[f64],
    beta: f64,
    gamma: &[f64],
    gamma_floor: f64,
) -> Result<f64> {
    Subproblem::new(a, y, logdet_weights, edge_weights, beta, gamma_floor)?.kkt_residual(gamma)
}
