use proptest::prelude::*;

use tvsbl::regularizers::{linear_tv, log_tv, log_tv_reweights};
use tvsbl::TvRegularizer;

fn naive_linear(g: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 1..g.len() {
        s += (g[i] - g[i - 1]).abs();
    }
    s
}

fn naive_log(g: &[f64], eps: f64) -> f64 {
    let mut s = 0.0;
    for i in 1..g.len() {
        s += ((g[i] - g[i - 1]).abs() + eps).ln();
    }
    s
}

fn gammas() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, 2..40)
}

#[test]
fn linear_examples() {
    assert_eq!(linear_tv(&[1.0, 1.0, 1.0]), 0.0);
    assert_eq!(linear_tv(&[0.0, 2.0, 0.0]), 4.0);
    assert_eq!(linear_tv(&[3.0]), 0.0);
}

#[test]
fn log_examples() {
    assert_eq!(log_tv(&[5.0, 5.0], 1.0), 0.0);
    assert!((log_tv(&[0.0, 1.0], 1.0) - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn reweight_examples() {
    let w = log_tv_reweights(&[2.0; 6], 0.1);
    assert_eq!(w.len(), 5);
    assert!(w.iter().all(|v| (v - 10.0).abs() < 1e-12));
    assert_eq!(log_tv_reweights(&[0.0, 1.0], 1.0), vec![0.5]);
}

#[test]
fn regularizer_penalties_and_weights() {
    let g = [0.0, 1.0, 1.5, 0.2];
    assert_eq!(TvRegularizer::None.penalty(&g), 0.0);
    assert_eq!(
        TvRegularizer::Linear { beta: 2.0 }.penalty(&g),
        2.0 * linear_tv(&g)
    );
    let log = TvRegularizer::Log {
        beta: 0.5,
        epsilon: 0.1,
    };
    assert!((log.penalty(&g) - 0.5 * log_tv(&g, 0.1)).abs() < 1e-15);
    assert_eq!(
        TvRegularizer::Linear { beta: 2.0 }.edge_weights(&g),
        vec![1.0; 3]
    );
    assert_eq!(log.edge_weights(&g), log_tv_reweights(&g, 0.1));
}

#[test]
fn regularizer_parsing() {
    let cases = [
        ("none", TvRegularizer::None),
        ("linear-tv:0.3", TvRegularizer::Linear { beta: 0.3 }),
        (
            "log-tv:3:0.1",
            TvRegularizer::Log {
                beta: 3.0,
                epsilon: 0.1,
            },
        ),
    ];
    for (text, reg) in cases {
        assert_eq!(
            text.parse::<TvRegularizer>().unwrap(),
            reg,
            "parsing {text}"
        );
        assert_eq!(reg.to_string().parse::<TvRegularizer>().unwrap(), reg);
    }
    assert_eq!(
        "log-tv".parse::<TvRegularizer>().unwrap(),
        TvRegularizer::Log {
            beta: 1.0,
            epsilon: 0.01
        }
    );
    for bad in [
        "",
        "tv",
        "linear-tv:-1",
        "log-tv:1:0",
        "log-tv:1:0.1:3",
        "linear-tv:x",
    ] {
        assert!(
            bad.parse::<TvRegularizer>().is_err(),
            "{bad:?} should be rejected"
        );
    }
    assert!(TvRegularizer::linear(f64::NAN).is_err());
    assert!(TvRegularizer::log(1.0, -0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn log_majorizer_is_tangent_upper_bound(g0 in gammas(), seed in any::<u64>(), eps in 1e-3f64..1.0) {
        let n = g0.len();
        let g: Vec<f64> = (0..n).map(|i| {
            let h = tvsbl::signal_gen::derive_seed(seed, i as u64);
            (h >> 11) as f64 / (1u64 << 53) as f64 * 10.0
        }).collect();
        let w = log_tv_reweights(&g0, eps);
        let diffs = |v: &[f64]| v.windows(2).map(|p| (p[1] - p[0]).abs()).collect::<Vec<_>>();
        let (d, d0) = (diffs(&g), diffs(&g0));
        let bound = log_tv(&g0, eps) + w.iter().zip(d.iter().zip(&d0)).map(|(w, (a, b))| w * (a - b)).sum::<f64>();
        prop_assert!(log_tv(&g, eps) <= bound + 1e-12 * bound.abs().max(1.0));
        let at_g0 = log_tv(&g0, eps) + w.iter().zip(d0.iter().zip(&d0)).map(|(w, (a, b))| w * (a - b)).sum::<f64>();
        prop_assert!((at_g0 - log_tv(&g0, eps)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_naive_loops(g in gammas(), eps in 1e-3f64..1.0) {
        prop_assert!((linear_tv(&g) - naive_linear(&g)).abs() <= 1e-12 * naive_linear(&g).max(1.0));
        prop_assert!((log_tv(&g, eps) - naive_log(&g, eps)).abs() <= 1e-12 * naive_log(&g, eps).abs().max(1.0));
        let w = log_tv_reweights(&g, eps);
        for i in 0..w.len() {
            prop_assert_eq!(w[i], 1.0 / ((g[i + 1] - g[i]).abs() + eps));
            prop_assert!(w[i] > 0.0 && w[i] <= 1.0 / eps);
        }
    }

    #[test]
    fn linear_is_seminorm(a in gammas(), s in -5.0f64..5.0, c in 0.0f64..5.0) {
        let b: Vec<f64> = a.iter().rev().copied().collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let scaled: Vec<f64> = a.iter().map(|x| s * x).collect();
        prop_assert!(linear_tv(&a) >= 0.0);
        prop_assert!(linear_tv(&sum) <= linear_tv(&a) + linear_tv(&b) + 1e-12);
        prop_assert!((linear_tv(&scaled) - s.abs() * linear_tv(&a)).abs() <= 1e-12 * linear_tv(&a).max(1.0));
        prop_assert_eq!(linear_tv(&vec![c; a.len()]), 0.0);
    }

    #[test]
    fn penalties_ignore_shifts(g in prop::collection::vec(-8i32..8, 2..30), shift in -8i32..8, eps in 1e-3f64..1.0) {
        // integer-valued vectors keep the shifted differences exact
        let a: Vec<f64> = g.iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = g.iter().map(|&v| (v + shift) as f64).collect();
        prop_assert_eq!(linear_tv(&a), linear_tv(&b));
        prop_assert_eq!(log_tv(&a, eps), log_tv(&b, eps));
    }
}
