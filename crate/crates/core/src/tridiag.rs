//! Symmetric tridiagonal solves and a bound-constrained projected Newton
//! method for objectives whose Hessian is tridiagonal.

/// Solves `T x = rhs` for symmetric tridiagonal `T` (main diagonal `diag`,
/// sub/super diagonal `off`). Returns `None` on a zero pivot.
pub fn solve_symmetric(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(off.len() + 1, n.max(1));
    debug_assert_eq!(rhs.len(), n);
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return None;
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        c[i - 1] = off[i - 1] / pivot;
        pivot = diag[i] - off[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}

pub trait TridiagObjective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
    /// Writes the Hessian main diagonal and off-diagonal at `x`.
    fn hessian(&self, x: &[f64], diag: &mut [f64], off: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iters: usize,
    /// Stop when the projected gradient infinity norm drops below this.
    pub gradient_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            gradient_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOutcome {
    pub iterations: usize,
    pub converged: bool,
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Minimizes `obj` over the box `lower ≤ x ≤ upper`, starting from `x`
/// (projected onto the box first).
pub fn projected_newton<O: TridiagObjective>(
    obj: &O,
    x: &mut [f64],
    lower: &[f64],
    upper: &[f64],
    opts: NewtonOptions,
) -> NewtonOutcome {
    let n = x.len();
    for i in 0..n {
        x[i] = clamp(x[i], lower[i], upper[i]);
    }
    if n == 0 {
        return NewtonOutcome {
            iterations: 0,
            converged: true,
        };
    }
    let mut grad = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut active = vec![false; n];
    let mut trial = vec![0.0; n];
    let mut value = obj.value(x);

    for iter in 0..opts.max_iters {
        obj.gradient(x, &mut grad);
        let mut pg_norm = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..n {
            let pg = x[i] - clamp(x[i] - grad[i], lower[i], upper[i]);
            pg_norm = pg_norm.max(pg.abs());
            scale = scale.max(grad[i].abs());
        }
        if pg_norm <= opts.gradient_tol * scale {
            return NewtonOutcome {
                iterations: iter,
                converged: true,
            };
        }
        let eps = pg_norm.min(1e-3);
        for i in 0..n {
            active[i] = lower[i] == upper[i]
                || (x[i] <= lower[i] + eps && grad[i] > 0.0)
                || (x[i] >= upper[i] - eps && grad[i] < 0.0);
        }
        obj.hessian(x, &mut diag, &mut off);
        let dmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let ridge = 1e-14 * dmax + 1e-300;
        let mut rhs = grad.clone();
        for i in 0..n {
            if active[i] {
                if diag[i] <= ridge {
                    diag[i] = dmax.max(1.0);
                }
                if i > 0 {
                    off[i - 1] = 0.0;
                }
                if i + 1 < n {
                    off[i] = 0.0;
                }
            } else {
                diag[i] += ridge;
            }
        }
        for i in 0..n {
            if active[i] {
                rhs[i] = grad[i];
            }
        }
        let Some(dir) = solve_symmetric(&diag, &off, &rhs) else {
            return NewtonOutcome {
                iterations: iter,
                converged: false,
            };
        };

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut decrease = 0.0;
            for i in 0..n {
                trial[i] = clamp(x[i] - t * dir[i], lower[i], upper[i]);
                decrease += if active[i] {
                    grad[i] * (x[i] - trial[i])
                } else {
                    t * grad[i] * dir[i]
                };
            }
            let v = obj.value(&trial);
            if v.is_finite() && v <= value - 1e-4 * decrease.max(0.0) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no representable decrease left along the projected Newton arc
            return NewtonOutcome {
                iterations: iter + 1,
                converged: pg_norm <= 1e-9 * scale,
            };
        }
        let step = trial
            .iter()
            .zip(x.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let xmax = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        x.copy_from_slice(&trial);
        value = obj.value(x);
        if step <= 1e-15 * xmax {
            return NewtonOutcome {
                iterations: iter + 1,
                converged: true,
            };
        }
    }
    NewtonOutcome {
        iterations: opts.max_iters,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_matches_dense() {
        let diag = [4.0, 5.0, 6.0, 3.0];
        let off = [1.0, -2.0, 0.5];
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = solve_symmetric(&diag, &off, &rhs).unwrap();
        for i in 0..4 {
            let mut r = diag[i] * x[i];
            if i > 0 {
                r += off[i - 1] * x[i - 1];
            }
            if i < 3 {
                r += off[i] * x[i + 1];
            }
            assert!((r - rhs[i]).abs() < 1e-12);
        }
    }

    struct Quadratic {
        target: Vec<f64>,
    }

    impl TridiagObjective for Quadratic {
        fn value(&self, x: &[f64]) -> f64 {
            let fit: f64 = x
                .iter()
                .zip(&self.target)
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            let smooth: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            0.5 * fit + 0.5 * smooth
        }
        fn gradient(&self, x: &[f64], g: &mut [f64]) {
            let n = x.len();
            for i in 0..n {
                g[i] = x[i] - self.target[i];
                if i > 0 {
                    g[i] += x[i] - x[i - 1];
                }
                if i + 1 < n {
                    g[i] += x[i] - x[i + 1];
                }
            }
        }
        fn hessian(&self, _x: &[f64], d: &mut [f64], o: &mut [f64]) {
            let n = d.len();
            for (i, v) in d.iter_mut().enumerate() {
                *v = 1.0 + if i > 0 { 1.0 } else { 0.0 } + if i + 1 < n { 1.0 } else { 0.0 };
            }
            o.iter_mut().for_each(|v| *v = -1.0);
        }
    }

    #[test]
    fn box_constrained_quadratic() {
        let obj = Quadratic {
            target: vec![-3.0, 2.0, 5.0],
        };
        let mut x = vec![0.0; 3];
        let lo = [0.0; 3];
        let hi = [f64::INFINITY, f64::INFINITY, 3.0];
        let out = projected_newton(&obj, &mut x, &lo, &hi, NewtonOptions::default());
        assert!(out.converged);
        // KKT: free coordinates have zero gradient, bound ones point outward
        let mut g = vec![0.0; 3];
        obj.gradient(&x, &mut g);
        assert_eq!(x[0], 0.0);
        assert!(g[0] >= 0.0);
        assert!(g[1].abs() < 1e-10);
        assert_eq!(x[2], 3.0);
        assert!(g[2] <= 0.0);
    }
}
