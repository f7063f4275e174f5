//! ADMM for `min Σ(L·wᵢγᵢ + cᵢ/γᵢ) + β·Σ uᵢ|γ_{i+1} − γᵢ|` over `γ ≥ floor`,
//! split as `z = Dγ` with `D` the first-difference operator.

use crate::error::{Error, Result};
use crate::inner::InnerOptions;
use crate::tridiag::{projected_newton, NewtonOptions, TridiagObjective};

/// Separable-plus-weighted-TV problem in γ.
#[derive(Debug, Clone)]
pub struct SeparableTvProblem {
    /// Linear coefficients (per snapshot), strictly positive.
    pub w: Vec<f64>,
    /// Inverse coefficients, nonnegative.
    pub c: Vec<f64>,
    /// Edge weights, one per consecutive pair, nonnegative.
    pub u: Vec<f64>,
    pub beta: f64,
    pub snapshots: usize,
    pub gamma_floor: f64,
}

impl SeparableTvProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.w.len();
        if n == 0 || self.c.len() != n || self.u.len() + 1 != n {
            return Err(Error::DimensionMismatch(format!(
                "w has {n} entries, c {}, u {} (expected {})",
                self.c.len(),
                self.u.len(),
                n.saturating_sub(1)
            )));
        }
        if self.w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("w must be positive and finite".into()));
        }
        if self
            .c
            .iter()
            .chain(&self.u)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::InvalidInput(
                "c and u must be nonnegative and finite".into(),
            ));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if self.snapshots == 0 {
            return Err(Error::InvalidInput(
                "snapshot count must be positive".into(),
            ));
        }
        if !(self.gamma_floor.is_finite() && self.gamma_floor >= 0.0) {
            return Err(Error::InvalidInput(
                "gamma floor must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn objective(&self, gamma: &[f64]) -> f64 {
        let l = self.snapshots as f64;
        let separable: f64 = gamma
            .iter()
            .zip(self.w.iter().zip(&self.c))
            .map(|(&g, (&w, &c))| l * w * g + if c == 0.0 { 0.0 } else { c / g })
            .sum();
        let tv: f64 = gamma
            .windows(2)
            .zip(&self.u)
            .map(|(p, &u)| u * (p[1] - p[0]).abs())
            .sum();
        separable + self.beta * tv
    }

    /// Per-coordinate minimizer without coupling: `max(√(cᵢ/(L·wᵢ)), floor)`.
    pub fn uncoupled_minimizer(&self) -> Vec<f64> {
        let l = self.snapshots as f64;
        self.w
            .iter()
            .zip(&self.c)
            .map(|(&w, &c)| (c / (l * w)).sqrt().max(self.gamma_floor))
            .collect()
    }

    fn coupled(&self) -> bool {
        self.beta > 0.0 && self.u.iter().any(|u| *u > 0.0)
    }
}

/// Iterates carried between consecutive solves of nearby problems.
#[derive(Debug, Clone)]
pub(crate) struct AdmmState {
    z: Vec<f64>,
    dual: Vec<f64>,
    rho: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct AdmmOutcome {
    pub gamma: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

/// `Σ(L·wᵢγᵢ + cᵢ/γᵢ) + ρ/2·‖Dγ − t‖²`
struct GammaStep<'a> {
    lw: &'a [f64],
    c: &'a [f64],
    target: &'a [f64],
    rho: f64,
}

impl GammaStep<'_> {
    fn edge_residual(&self, x: &[f64], k: usize) -> f64 {
        x[k + 1] - x[k] - self.target[k]
    }
}

impl TridiagObjective for GammaStep<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for ((&xi, &lw), &c) in x.iter().zip(self.lw).zip(self.c) {
            v += lw * xi;
            if c != 0.0 {
                v += c / xi;
            }
        }
        let mut pen = 0.0;
        for k in 0..self.target.len() {
            pen += self.edge_residual(x, k).powi(2);
        }
        v + 0.5 * self.rho * pen
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for i in 0..x.len() {
            grad[i] = self.lw[i] - self.c[i] / (x[i] * x[i]);
        }
        for k in 0..self.target.len() {
            let r = self.rho * self.edge_residual(x, k);
            grad[k + 1] += r;
            grad[k] -= r;
        }
    }

    fn hessian(&self, x: &[f64], diag: &mut [f64], off: &mut [f64]) {
        for i in 0..x.len() {
            diag[i] = 2.0 * self.c[i] / (x[i] * x[i] * x[i]);
        }
        for k in 0..self.target.len() {
            diag[k] += self.rho;
            diag[k + 1] += self.rho;
            off[k] = -self.rho;
        }
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Runs ADMM from `gamma_init`, optionally warm-started from `state`.
pub(crate) fn solve_admm(
    problem: &SeparableTvProblem,
    gamma_init: &[f64],
    opts: &InnerOptions,
    state: &mut Option<AdmmState>,
) -> AdmmOutcome {
    let n = problem.w.len();
    let floor = problem.gamma_floor;
    if !problem.coupled() || n == 1 {
        return AdmmOutcome {
            gamma: problem.uncoupled_minimizer(),
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            converged: true,
        };
    }

    let l = problem.snapshots as f64;
    let lower = vec![floor; n];
    let upper = vec![f64::INFINITY; n];
    let mut gamma: Vec<f64> = gamma_init.iter().map(|g| g.max(floor)).collect();
    let st = state.get_or_insert_with(|| AdmmState {
        z: gamma.windows(2).map(|p| p[1] - p[0]).collect(),
        dual: vec![0.0; n - 1],
        rho: opts.admm_rho,
    });
    if st.z.len() != n - 1 {
        *st = AdmmState {
            z: gamma.windows(2).map(|p| p[1] - p[0]).collect(),
            dual: vec![0.0; n - 1],
            rho: opts.admm_rho,
        };
    }

    let lw: Vec<f64> = problem.w.iter().map(|w| l * w).collect();
    let mut target = vec![0.0; n - 1];
    let mut z_old = vec![0.0; n - 1];
    let mut primal = f64::INFINITY;
    let mut dual_res = f64::INFINITY;
    let newton = NewtonOptions::default();

    for iter in 1..=opts.max_admm_iters {
        for (t, (z, d)) in target.iter_mut().zip(st.z.iter().zip(&st.dual)) {
            *t = z - d;
        }
        let step = GammaStep {
            lw: &lw,
            c: &problem.c,
            target: &target,
            rho: st.rho,
        };
        projected_newton(&step, &mut gamma, &lower, &upper, newton);

        z_old.copy_from_slice(&st.z);
        let mut p2 = 0.0;
        for k in 0..n - 1 {
            let dg = gamma[k + 1] - gamma[k];
            st.z[k] = soft_threshold(dg + st.dual[k], problem.beta * problem.u[k] / st.rho);
            let r = dg - st.z[k];
            st.dual[k] += r;
            p2 += r * r;
        }
        // ‖ρDᵀ(z − z_old)‖
        let mut d2 = 0.0;
        for i in 0..n {
            let left = if i > 0 {
                st.z[i - 1] - z_old[i - 1]
            } else {
                0.0
            };
            let right = if i + 1 < n { st.z[i] - z_old[i] } else { 0.0 };
            d2 += (left - right).powi(2);
        }
        primal = p2.sqrt();
        dual_res = st.rho * d2.sqrt();
        if primal <= opts.admm_tol_primal && dual_res <= opts.admm_tol_dual {
            return AdmmOutcome {
                gamma: fuse_segments(gamma, &st.z, &problem.u, floor),
                iterations: iter,
                primal_residual: primal,
                dual_residual: dual_res,
                converged: true,
            };
        }
        if primal > 10.0 * dual_res {
            st.rho *= 2.0;
            st.dual.iter_mut().for_each(|d| *d *= 0.5);
        } else if dual_res > 10.0 * primal {
            st.rho *= 0.5;
            st.dual.iter_mut().for_each(|d| *d *= 2.0);
        }
    }
    AdmmOutcome {
        gamma: fuse_segments(gamma, &st.z, &problem.u, floor),
        iterations: opts.max_admm_iters,
        primal_residual: primal,
        dual_residual: dual_res,
        converged: false,
    }
}

/// Replaces every run joined by a thresholded-to-zero edge with its mean, so
/// that fused pieces are exactly constant.
fn fuse_segments(mut gamma: Vec<f64>, z: &[f64], u: &[f64], floor: f64) -> Vec<f64> {
    let n = gamma.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && z[end - 1] == 0.0 && u[end - 1] > 0.0 {
            end += 1;
        }
        if end - start > 1 {
            let mean = gamma[start..end].iter().sum::<f64>() / (end - start) as f64;
            let value = if gamma[start..end].iter().all(|g| *g == floor) {
                floor
            } else {
                mean.max(floor)
            };
            gamma[start..end].iter_mut().for_each(|g| *g = value);
        }
        start = end;
    }
    gamma
}

/// Global minimizer of the separable-plus-TV problem.
///
/// With `beta = 0` this is the closed form `max(√(cᵢ/(L·wᵢ)), floor)`;
/// otherwise ADMM is run from the uncoupled minimizer.
pub fn separable_tv_min(problem: &SeparableTvProblem, opts: &InnerOptions) -> Result<Vec<f64>> {
    problem.validate()?;
    let start = problem.uncoupled_minimizer();
    let out = solve_admm(problem, &start, opts, &mut None);
    if !out.converged {
        return Err(Error::AdmmNotConverged {
            iterations: out.iterations,
            primal: out.primal_residual,
            dual: out.dual_residual,
        });
    }
    Ok(out.gamma)
}
