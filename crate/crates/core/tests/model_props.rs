use num_complex::Complex64;
use proptest::prelude::*;
use superres_core::model::{
    fourier_at, make_signal, moments, sample_measurement, scale_signal, validate_cluster,
    ClusterSpec, MeasurementGrid, Noise,
};
use superres_core::SpikeSignal;

fn spikes(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|d| {
        (
            prop::collection::vec(0.1f64..3.0, d),
            prop::collection::btree_set(-500i32..500, d)
                .prop_map(|s| s.into_iter().map(|k| k as f64 * 1e-3).collect::<Vec<_>>())
                .prop_shuffle(),
        )
    })
}

proptest! {
    #[test]
    fn make_signal_sorts_and_keeps_pairs((amps, nodes) in spikes(6)) {
        let f = make_signal(
            amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            nodes.clone(),
            true,
        ).unwrap();
        prop_assert!(f.nodes().windows(2).all(|w| w[0] < w[1]));
        for (x, a) in f.nodes().iter().zip(f.amplitudes()) {
            let i = nodes.iter().position(|y| y == x).unwrap();
            prop_assert_eq!(a.re, amps[i]);
        }
    }

    #[test]
    fn scaling_dilates_fourier_data((amps, nodes) in spikes(5), t in 0.2f64..5.0, s in -20.0f64..20.0) {
        let f = SpikeSignal::positive(&amps, &nodes).unwrap();
        let g = scale_signal(&f, t);
        let lhs = fourier_at(&g, s);
        let rhs = fourier_at(&f, s / t);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + amps.iter().sum::<f64>()));
    }

    #[test]
    fn zeroth_moment_is_total_mass_and_fourier_at_origin((amps, nodes) in spikes(5)) {
        let f = SpikeSignal::positive(&amps, &nodes).unwrap();
        let m = moments(&f, 3);
        let total: f64 = amps.iter().sum();
        prop_assert!((m[0].re - total).abs() < 1e-12 * total);
        prop_assert!((fourier_at(&f, 0.0) - m[0]).norm() < 1e-12 * total);
    }

    #[test]
    fn moments_match_naive_sum((amps, nodes) in spikes(4), k in 0usize..8) {
        let f = SpikeSignal::positive(&amps, &nodes).unwrap();
        let m = moments(&f, k);
        let naive: f64 = amps.iter().zip(&nodes).map(|(a, x)| a * x.powi(k as i32)).sum();
        prop_assert!((m[k].re - naive).abs() < 1e-12 * (1.0 + naive.abs()));
    }

    #[test]
    fn uniform_noise_respects_budget_and_seed(
        (amps, nodes) in spikes(4),
        eps in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let f = SpikeSignal::positive(&amps, &nodes).unwrap();
        let grid = MeasurementGrid::new(7.0, 21).unwrap();
        let y = sample_measurement(&f, &grid, eps, Noise::UniformDisk, seed).unwrap();
        let again = sample_measurement(&f, &grid, eps, Noise::UniformDisk, seed).unwrap();
        prop_assert_eq!(y.values(), again.values());
        for (k, v) in y.values().iter().enumerate() {
            let clean = fourier_at(&f, grid.frequency(k));
            prop_assert!((v - clean).norm() <= eps * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn feasible_layouts_validate(
        d in 2usize..6,
        p_off in 0usize..4,
        h in 0.01f64..0.2,
        eta in 0.01f64..0.12,
        tau_frac in 0.1f64..=1.0,
        centered in any::<bool>(),
        kappa_seed in 0usize..8,
    ) {
        let p = 2 + p_off % (d - 1);
        let kappa = 1 + kappa_seed % (d - p + 1);
        let tau = tau_frac / (p - 1) as f64;
        let spec = ClusterSpec {
            d, p, h, big_t: 1.0, tau, eta, kappa,
            m_lower: 1.0, m_upper: 2.0, centered,
        };
        prop_assume!(spec.check_feasible().is_ok());
        let nodes = spec.layout().unwrap();
        prop_assert_eq!(nodes.len(), d);
        prop_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        let report = validate_cluster(&nodes, &spec);
        prop_assert!(report.valid, "{}", report);
    }
}
