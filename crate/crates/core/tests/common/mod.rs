#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tvsbl::{Dictionary, MeasurementSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform dictionary and measurements plus a positive γ.
pub fn random_instance(
    seed: u64,
    m: usize,
    n: usize,
    l: usize,
) -> (Dictionary, MeasurementSet, Vec<f64>) {
    let mut rng = rng(seed);
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let y = DMatrix::from_fn(m, l, |_, _| rng.random_range(-2.0..2.0));
    let gamma = (0..n).map(|_| rng.random_range(0.05..3.0)).collect();
    let lambda = rng.random_range(0.1..1.0);
    (
        Dictionary::new(a).unwrap(),
        MeasurementSet::new(y, lambda).unwrap(),
        gamma,
    )
}

/// Gaussian dictionary with unit columns and a block-sparse signal in noise.
pub fn block_instance(
    seed: u64,
    m: usize,
    n: usize,
    l: usize,
    lambda: f64,
) -> (Dictionary, MeasurementSet) {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rng(seed);
    let mut a = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    for mut c in a.column_iter_mut() {
        let norm = c.norm();
        c /= norm;
    }
    let start = rng.random_range(0..n.saturating_sub(4).max(1));
    let mut x = DMatrix::zeros(n, l);
    for i in start..(start + 4).min(n) {
        for j in 0..l {
            x[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let noise = DMatrix::from_fn(m, l, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        lambda.sqrt() * z
    });
    let y = &a * x + noise;
    (
        Dictionary::new(a).unwrap(),
        MeasurementSet::new(y, lambda).unwrap(),
    )
}

pub fn log_det(m: &DMatrix<f64>) -> f64 {
    2.0 * m
        .clone()
        .cholesky()
        .unwrap()
        .l()
        .diagonal()
        .iter()
        .map(|d| d.ln())
        .sum::<f64>()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den.max(1e-300)).sqrt()
}

/// Σ_l y_lᵀ(λI + AΓAᵀ)⁻¹y_l through a dense inverse.
pub fn datafit(a: &DMatrix<f64>, y: &DMatrix<f64>, gamma: &[f64], lambda: f64) -> f64 {
    let mut s = DMatrix::identity(a.nrows(), a.nrows()) * lambda;
    for (i, g) in gamma.iter().enumerate() {
        s += a.column(i) * a.column(i).transpose() * *g;
    }
    let inv = s.try_inverse().unwrap();
    (y.transpose() * inv * y).trace()
}

/// Subproblem objective `L·Σwγ + datafit + β·Σu|Δγ|`, evaluated densely.
pub fn subproblem_objective(
    a: &DMatrix<f64>,
    y: &DMatrix<f64>,
    lambda: f64,
    w: &[f64],
    u: &[f64],
    beta: f64,
    g: &[f64],
) -> f64 {
    let l = y.ncols() as f64;
    let lin: f64 = w.iter().zip(g).map(|(w, g)| w * g).sum();
    let tv: f64 = g
        .windows(2)
        .zip(u)
        .map(|(p, u)| u * (p[1] - p[0]).abs())
        .sum();
    l * lin + datafit(a, y, g, lambda) + beta * tv
}

/// Brute-force minimizer over the box `[lo, hi]^n`: a grid with `points`
/// nodes per axis (0 at `lo`, then log-spaced), refined by pattern search
/// along every direction in {−1, 0, 1}ⁿ.
pub fn grid_minimize(
    f: &dyn Fn(&[f64]) -> f64,
    n: usize,
    lo: f64,
    hi: f64,
    points: usize,
) -> (Vec<f64>, f64) {
    let start = (hi * 1e-6).max(lo.max(1e-300));
    let axis: Vec<f64> = std::iter::once(lo)
        .chain((0..points - 1).map(|k| start * (hi / start).powf(k as f64 / (points - 2) as f64)))
        .collect();
    let mut best = (vec![lo; n], f64::INFINITY);
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&k| axis[k]).collect();
        let v = f(&x);
        if v < best.1 {
            best = (x, v);
        }
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    let dirs: Vec<Vec<f64>> = (1..3usize.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let t = (k % 3) as f64 - 1.0;
                    k /= 3;
                    t
                })
                .collect()
        })
        .collect();
    let (mut x, mut fx) = best;
    let mut step = x.iter().fold(hi * 0.05, |m, v| m.max(*v * 0.5));
    while step > 1e-13 * hi {
        let mut improved = false;
        for d in &dirs {
            let cand: Vec<f64> = x
                .iter()
                .zip(d)
                .map(|(v, s)| (v + step * s).clamp(lo, hi))
                .collect();
            let fc = f(&cand);
            if fc < fx {
                x = cand;
                fx = fc;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}
