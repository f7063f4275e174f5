//! Minimal-norm subgradient of `s·γ + β·Σ uₖ|γ_{k+1} − γₖ|` over `γ ≥ floor`,
//! given the smooth gradient `s`.
//!
//! An element of the subdifferential is `s + Dᵀξ − ν`, where `ξₖ` lies in
//! `β·uₖ·sign(Δγₖ)` (the whole interval `[−β·uₖ, β·uₖ]` on fused edges) and
//! `ν ≥ 0` is supported on coordinates sitting at the floor. Eliminating ν,
//! the squared norm to minimize over the ξ box is `Σᵢ φᵢ(tᵢ)` with
//! `tᵢ = sᵢ + ξ_{i−1} − ξᵢ`, `φ(t) = t²` on free coordinates and
//! `φ(t) = min(t, 0)²` on bound ones. That chain problem has a tridiagonal
//! Hessian and is solved exactly by projected Newton.

use crate::tridiag::{projected_newton, NewtonOptions, TridiagObjective};

struct Chain<'a> {
    smooth: &'a [f64],
    at_floor: &'a [bool],
}

impl Chain<'_> {
    fn t(&self, xi: &[f64], i: usize) -> f64 {
        let n = self.smooth.len();
        let left = if i > 0 { xi[i - 1] } else { 0.0 };
        let right = if i + 1 < n { xi[i] } else { 0.0 };
        self.smooth[i] + left - right
    }

    fn phi_prime(&self, i: usize, t: f64) -> f64 {
        if self.at_floor[i] {
            2.0 * t.min(0.0)
        } else {
            2.0 * t
        }
    }

    fn phi_second(&self, i: usize, t: f64) -> f64 {
        if self.at_floor[i] && t > 0.0 {
            0.0
        } else {
            2.0
        }
    }
}

impl TridiagObjective for Chain<'_> {
    fn value(&self, xi: &[f64]) -> f64 {
        (0..self.smooth.len())
            .map(|i| {
                let t = self.t(xi, i);
                let t = if self.at_floor[i] { t.min(0.0) } else { t };
                t * t
            })
            .sum()
    }

    fn gradient(&self, xi: &[f64], grad: &mut [f64]) {
        // ξₖ enters t_k with −1 and t_{k+1} with +1
        for (k, g) in grad.iter_mut().enumerate() {
            *g = -self.phi_prime(k, self.t(xi, k)) + self.phi_prime(k + 1, self.t(xi, k + 1));
        }
    }

    fn hessian(&self, xi: &[f64], diag: &mut [f64], off: &mut [f64]) {
        let m = xi.len();
        for k in 0..m {
            let a = self.phi_second(k, self.t(xi, k));
            let b = self.phi_second(k + 1, self.t(xi, k + 1));
            diag[k] = a + b;
            if k + 1 < m {
                off[k] = -b;
            }
        }
    }
}

/// Norm of the minimal-norm subgradient (projected stationarity measure).
pub(crate) fn minimal_subgradient_norm(
    smooth: &[f64],
    gamma: &[f64],
    edge_weights: &[f64],
    beta: f64,
    floor: f64,
) -> f64 {
    let n = gamma.len();
    let at_floor: Vec<bool> = gamma.iter().map(|g| *g <= floor).collect();
    let chain = Chain {
        smooth,
        at_floor: &at_floor,
    };
    if n == 1 || beta == 0.0 {
        return chain.value(&vec![0.0; n.saturating_sub(1)]).sqrt();
    }
    let mut lower = vec![0.0; n - 1];
    let mut upper = vec![0.0; n - 1];
    for k in 0..n - 1 {
        let b = beta * edge_weights[k];
        let diff = gamma[k + 1] - gamma[k];
        let (lo, hi) = if diff > 0.0 {
            (b, b)
        } else if diff < 0.0 {
            (-b, -b)
        } else {
            (-b, b)
        };
        lower[k] = lo;
        upper[k] = hi;
    }
    // start from the cumulative sums that zero every free tᵢ, clipped to the box
    let mut xi = vec![0.0; n - 1];
    let mut acc = 0.0;
    for k in 0..n - 1 {
        acc += smooth[k];
        xi[k] = acc.max(lower[k]).min(upper[k]);
        acc = xi[k];
    }
    let opts = NewtonOptions {
        max_iters: 200,
        gradient_tol: 1e-15,
    };
    projected_newton(&chain, &mut xi, &lower, &upper, opts);
    chain.value(&xi).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_coordinates_without_coupling() {
        let r = minimal_subgradient_norm(&[3.0, -4.0], &[1.0, 2.0], &[1.0], 0.0, 0.0);
        assert!((r - 5.0).abs() < 1e-14);
    }

    #[test]
    fn floor_absorbs_positive_gradient() {
        let r = minimal_subgradient_norm(&[3.0, -4.0], &[0.0, 2.0], &[1.0], 0.0, 0.0);
        assert!((r - 4.0).abs() < 1e-14);
    }

    #[test]
    fn fused_edge_balances_opposite_gradients() {
        // s = (1, −1) on a fused pair: ξ = 1 cancels both when β·u ≥ 1
        let r = minimal_subgradient_norm(&[1.0, -1.0], &[2.0, 2.0], &[1.0], 1.5, 0.0);
        assert!(r < 1e-12, "{r}");
        // with β·u = 0.5 the residual is (0.5, −0.5)
        let r = minimal_subgradient_norm(&[1.0, -1.0], &[2.0, 2.0], &[1.0], 0.5, 0.0);
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12, "{r}");
    }

    #[test]
    fn fixed_sign_edge() {
        // γ₂ > γ₁ fixes ξ = β·u = 1: t = (2 − 1, −1 + 1)
        let r = minimal_subgradient_norm(&[2.0, -1.0], &[1.0, 2.0], &[1.0], 1.0, 0.0);
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }
}
