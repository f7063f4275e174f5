//! Newton refinement of a subproblem iterate on its current piecewise
//! structure: runs of equal γ move together, runs at the floor stay there
//! unless their gradient asks to leave, and no nonzero difference is allowed
//! to change sign within a step (a step that reaches a sign change or the
//! floor stops there, merging the structure).

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::Result;
use crate::inner::Subproblem;
use crate::model::CovarianceFactor;

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: usize,
    end: usize,
    value: f64,
}

fn segments(gamma: &[f64]) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=gamma.len() {
        if i == gamma.len() || gamma[i] != gamma[start] {
            out.push(Segment {
                start,
                end: i,
                value: gamma[start],
            });
            start = i;
        }
    }
    out
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Returns the refined point and its objective, or `None` when no step
/// improved on `gamma`.
pub(crate) fn polish(
    sub: &Subproblem<'_>,
    gamma: &[f64],
    max_steps: usize,
) -> Result<Option<(Vec<f64>, f64)>> {
    let a = sub.dictionary.matrix();
    let y = sub.measurements.y();
    let lambda = sub.measurements.noise_variance();
    let l = y.ncols() as f64;
    let floor = sub.gamma_floor;
    let beta = sub.beta;
    let u = sub.edge_weights;

    let mut g = gamma.to_vec();
    let mut obj = sub.objective(&g)?;
    let start_obj = obj;
    let scale = sub.kkt_scale();

    for _ in 0..max_steps {
        let segs = segments(&g);
        let factor = CovarianceFactor::new(a, &g, lambda)?;
        let p = a.transpose() * factor.solve(y);
        let c = a.transpose() * factor.solve(a);
        let ppt = &p * p.transpose();

        let smooth: Vec<f64> = (0..g.len())
            .map(|i| l * sub.logdet_weights[i] - p.row(i).norm_squared())
            .collect();
        let seg_grad: Vec<f64> = segs
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let mut v: f64 = smooth[s.start..s.end].iter().sum();
                if j > 0 {
                    v += beta * u[s.start - 1] * sign(s.value - segs[j - 1].value);
                }
                if j + 1 < segs.len() {
                    v += beta * u[s.end - 1] * sign(s.value - segs[j + 1].value);
                }
                v
            })
            .collect();

        let mut free: Vec<usize> = (0..segs.len())
            .filter(|&j| segs[j].value > floor || seg_grad[j] < 0.0)
            .collect();
        if free.is_empty() {
            break;
        }

        let mut step = None;
        for _ in 0..2 {
            let gmax = free.iter().fold(0.0f64, |m, &j| m.max(seg_grad[j].abs()));
            if gmax <= 1e-14 * scale {
                break;
            }
            let k = free.len();
            let mut h = DMatrix::zeros(k, k);
            for (ra, &ja) in free.iter().enumerate() {
                for (rb, &jb) in free.iter().enumerate().skip(ra) {
                    let mut v = 0.0;
                    for i in segs[ja].start..segs[ja].end {
                        for jj in segs[jb].start..segs[jb].end {
                            v += 2.0 * c[(i, jj)] * ppt[(i, jj)];
                        }
                    }
                    h[(ra, rb)] = v;
                    h[(rb, ra)] = v;
                }
            }
            let rhs = DVector::from_iterator(k, free.iter().map(|&j| seg_grad[j]));
            let dmax = h.diagonal().amax();
            let mut ridge = 1e-12 * dmax + 1e-300;
            let dir = loop {
                let mut hr = h.clone();
                for i in 0..k {
                    hr[(i, i)] += ridge;
                }
                if let Some(ch) = Cholesky::new(hr) {
                    break ch.solve(&rhs);
                }
                ridge *= 100.0;
            };
            let mut d = vec![0.0; segs.len()];
            for (r, &j) in free.iter().enumerate() {
                d[j] = dir[r];
            }
            // released floor runs must move up
            let stuck: Vec<usize> = free
                .iter()
                .copied()
                .filter(|&j| segs[j].value <= floor && d[j] > 0.0)
                .collect();
            if stuck.is_empty() {
                step = Some(d);
                break;
            }
            free.retain(|j| !stuck.contains(j));
            if free.is_empty() {
                break;
            }
        }
        let Some(d) = step else { break };

        // largest step keeping values above the floor and signs of differences
        let mut t_max = 1.0f64;
        for (j, s) in segs.iter().enumerate() {
            if d[j] > 0.0 && s.value > floor {
                t_max = t_max.min((s.value - floor) / d[j]);
            }
            if j + 1 < segs.len() {
                let diff = segs[j + 1].value - s.value;
                let rate = d[j + 1] - d[j];
                if rate != 0.0 && sign(rate) == sign(diff) {
                    t_max = t_max.min(diff / rate);
                }
            }
        }

        let grad_dir: f64 = segs
            .iter()
            .enumerate()
            .map(|(j, _)| seg_grad[j] * d[j])
            .sum();
        let mut t = t_max;
        let mut accepted = None;
        for _ in 0..40 {
            let mut values: Vec<f64> = segs
                .iter()
                .enumerate()
                .map(|(j, s)| (s.value - t * d[j]).max(floor))
                .collect();
            snap(&mut values, floor);
            let mut cand = vec![0.0; g.len()];
            for (s, v) in segs.iter().zip(&values) {
                cand[s.start..s.end].iter_mut().for_each(|x| *x = *v);
            }
            let v = sub.objective(&cand)?;
            if v <= obj - 1e-4 * t * grad_dir.max(0.0) {
                accepted = Some((cand, v));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, v)) = accepted else { break };
        let progress = obj - v;
        g = cand;
        obj = v;
        if progress <= 1e-15 * obj.abs().max(1.0) {
            break;
        }
    }
    Ok((obj < start_obj).then_some((g, obj)))
}

/// Makes values that are equal up to rounding exactly equal, and values at
/// the floor up to rounding exactly the floor.
fn snap(values: &mut [f64], floor: f64) {
    for v in values.iter_mut() {
        if *v <= floor * (1.0 + 1e-12) {
            *v = floor;
        }
    }
    for j in 0..values.len().saturating_sub(1) {
        let scale = values[j].abs().max(values[j + 1].abs());
        if (values[j + 1] - values[j]).abs() <= 1e-12 * scale {
            values[j + 1] = values[j];
        }
    }
}
