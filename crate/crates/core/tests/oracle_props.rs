use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use superres_core::oracle::{error_set_diameters, SearchBox, FEASIBILITY_SLACK};
use superres_core::{Execution, SpikeSignal};

const OMEGA: f64 = 2.0;
const S: usize = 24;

fn signal() -> impl Strategy<Value = SpikeSignal> {
    prop_oneof![
        (0.5f64..2.0, -0.5f64..0.5).prop_map(|(a, x)| SpikeSignal::positive(&[a], &[x]).unwrap()),
        (0.5f64..2.0, 0.5f64..2.0, -0.6f64..-0.2, 0.2f64..0.6)
            .prop_map(|(a, b, x, y)| SpikeSignal::positive(&[a, b], &[x, y]).unwrap()),
    ]
}

/// Direct enumeration for one spike: every `(a, x)` on the same axes whose
/// Fourier difference stays within ε at the sample frequencies.
fn naive_single(a0: f64, x0: f64, eps: f64, wa: f64, wx: f64, r: usize) -> (f64, f64) {
    let k = (r / 2) as i64;
    let (sa, sx) = (wa / k as f64, wx / k as f64);
    let freqs: Vec<f64> = (0..S)
        .map(|i| -OMEGA + 2.0 * OMEGA * i as f64 / (S - 1) as f64)
        .collect();
    let (mut alo, mut ahi, mut xlo, mut xhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for i in -k..=k {
        let a = a0 + i as f64 * sa;
        if a <= 0.0 {
            continue;
        }
        for j in -k..=k {
            let x = x0 + j as f64 * sx;
            let ok = freqs.iter().all(|&s| {
                let d =
                    a * Complex64::cis(-2.0 * PI * x * s) - a0 * Complex64::cis(-2.0 * PI * x0 * s);
                d.norm() <= eps * (1.0 + FEASIBILITY_SLACK)
            });
            if ok {
                alo = alo.min(a);
                ahi = ahi.max(a);
                xlo = xlo.min(x);
                xhi = xhi.max(x);
            }
        }
    }
    (ahi - alo, xhi - xlo)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn execution_strategy_does_not_change_estimates(f in signal(), eps in 0.01f64..0.3, r in 4usize..12) {
        let b = SearchBox::uniform(f.len(), 2.0 * eps, eps / OMEGA);
        let seq = error_set_diameters(&f, eps, OMEGA, &b, r, S, Execution::Sequential).unwrap();
        let par = error_set_diameters(&f, eps, OMEGA, &b, r, S, Execution::Parallel).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn diameters_grow_with_epsilon(f in signal(), e1 in 0.01f64..0.2, factor in 1.0f64..3.0, r in 4usize..12) {
        let b = SearchBox::uniform(f.len(), 0.6, 0.1);
        let run = |e: f64| error_set_diameters(&f, e, OMEGA, &b, r, S, Execution::Sequential).unwrap();
        let (lo, hi) = (run(e1), run(e1 * factor));
        prop_assert!(lo.feasible_count <= hi.feasible_count);
        for j in 0..f.len() {
            prop_assert!(lo.per_node_diam[j] <= hi.per_node_diam[j]);
            prop_assert!(lo.per_amp_diam[j] <= hi.per_amp_diam[j]);
            prop_assert!(hi.per_node_diam[j] <= 0.2 * (1.0 + 1e-12));
            prop_assert!(hi.per_amp_diam[j] <= 1.2 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn truth_is_always_feasible(f in signal(), eps in 0.0f64..0.1, r in 2usize..10) {
        let b = SearchBox::uniform(f.len(), 0.3, 0.05);
        let est = error_set_diameters(&f, eps, OMEGA, &b, r, S, Execution::Parallel).unwrap();
        prop_assert!(est.feasible_count >= 1);
        prop_assert!(est.candidates >= est.feasible_count);
    }

    #[test]
    fn single_spike_matches_direct_enumeration(
        a0 in 0.5f64..2.0,
        x0 in -0.5f64..0.5,
        eps in 0.02f64..0.3,
        r in 4usize..16,
    ) {
        let f = SpikeSignal::positive(&[a0], &[x0]).unwrap();
        let (wa, wx) = (1.5 * eps, 0.3 * eps / OMEGA);
        let b = SearchBox::uniform(1, wa, wx);
        let est = error_set_diameters(&f, eps, OMEGA, &b, r, S, Execution::Sequential).unwrap();
        let (da, dx) = naive_single(a0, x0, eps, wa, wx, r);
        let cell_a = wa / (r / 2) as f64;
        let cell_x = wx / (r / 2) as f64;
        // boundary ties may differ by one cell through rounding
        prop_assert!((est.per_amp_diam[0] - da).abs() <= cell_a * (1.0 + 1e-9));
        prop_assert!((est.per_node_diam[0] - dx).abs() <= cell_x * (1.0 + 1e-9));
    }
}
