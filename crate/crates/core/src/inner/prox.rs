//! Weighted 1-D total-variation proximal map with a lower bound:
//!
//! ```text
//! argmin_x  ½·Σ dᵢ(xᵢ − vᵢ)² + Σ τₖ|x_{k+1} − xₖ|   subject to  x ≥ floor
//! ```
//!
//! The unconstrained problem is solved through its dual, a box-constrained
//! quadratic in the edge multipliers ξ with tridiagonal Hessian
//! `D·diag(1/d)·Dᵀ`. Runs of edges whose multiplier is strictly inside the
//! box are fused exactly. The bound is then applied by clamping, which is
//! exact for a common lower bound on a chain.

use crate::tridiag::{projected_newton, NewtonOptions, TridiagObjective};

struct Dual<'a> {
    v: &'a [f64],
    inv_d: Vec<f64>,
}

impl Dual<'_> {
    /// `(Dᵀξ)ᵢ = ξ_{i−1} − ξᵢ` with zero padding.
    fn dt_xi(&self, xi: &[f64], i: usize) -> f64 {
        let left = if i > 0 { xi[i - 1] } else { 0.0 };
        let right = if i < xi.len() { xi[i] } else { 0.0 };
        left - right
    }

    fn primal(&self, xi: &[f64], i: usize) -> f64 {
        self.v[i] - self.inv_d[i] * self.dt_xi(xi, i)
    }
}

impl TridiagObjective for Dual<'_> {
    fn value(&self, xi: &[f64]) -> f64 {
        // ½ ξᵀD diag(1/d) Dᵀξ − ξᵀDv
        (0..self.v.len())
            .map(|i| {
                let s = self.dt_xi(xi, i);
                0.5 * self.inv_d[i] * s * s - s * self.v[i]
            })
            .sum()
    }

    fn gradient(&self, xi: &[f64], grad: &mut [f64]) {
        // −(Dx)ₖ with x the primal point recovered from ξ
        for (k, g) in grad.iter_mut().enumerate() {
            *g = self.primal(xi, k) - self.primal(xi, k + 1);
        }
    }

    fn hessian(&self, _xi: &[f64], diag: &mut [f64], off: &mut [f64]) {
        let m = diag.len();
        for k in 0..m {
            diag[k] = self.inv_d[k] + self.inv_d[k + 1];
            if k + 1 < m {
                off[k] = -self.inv_d[k + 1];
            }
        }
    }
}

/// Proximal point described in the module docs. `d` must be positive.
pub(crate) fn weighted_tv_prox(v: &[f64], d: &[f64], tau: &[f64], floor: f64) -> Vec<f64> {
    let n = v.len();
    debug_assert_eq!(d.len(), n);
    debug_assert_eq!(tau.len() + 1, n.max(1));
    if n <= 1 || tau.iter().all(|t| *t == 0.0) {
        return v.iter().map(|x| x.max(floor)).collect();
    }
    let dual = Dual {
        v,
        inv_d: d.iter().map(|x| 1.0 / x).collect(),
    };
    let lower: Vec<f64> = tau.iter().map(|t| -t).collect();
    let mut xi = vec![0.0; n - 1];
    projected_newton(
        &dual,
        &mut xi,
        &lower,
        tau,
        NewtonOptions {
            max_iters: 200,
            gradient_tol: 1e-15,
        },
    );

    let mut x = vec![0.0; n];
    let mut start = 0;
    for end in 1..=n {
        // edge end−1 joins start..end to the next run when its multiplier is interior
        let fused = end < n && tau[end - 1] > 0.0 && xi[end - 1].abs() < tau[end - 1];
        if fused {
            continue;
        }
        let left = if start > 0 { xi[start - 1] } else { 0.0 };
        let right = if end < n { xi[end - 1] } else { 0.0 };
        let mass: f64 = d[start..end].iter().sum();
        let weighted: f64 = (start..end).map(|i| d[i] * v[i]).sum();
        let value = ((weighted - left + right) / mass).max(floor);
        x[start..end].iter_mut().for_each(|e| *e = value);
        start = end;
    }
    x
}
