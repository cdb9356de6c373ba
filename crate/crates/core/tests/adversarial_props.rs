use proptest::prelude::*;
use superres_core::adversarial::{
    build_adversarial_pair, interleaves, perturb_cluster, prony_from_moments,
};
use superres_core::model::{fourier_at, make_cluster_signal, AmplitudeSource, ClusterSpec};
use superres_core::SpikeSignal;

/// Positive clusters of 2 or 3 spikes with nodes on `[0, 0.1]`, minimum gap
/// 0.02.
fn cluster() -> impl Strategy<Value = SpikeSignal> {
    (2usize..=3).prop_flat_map(|p| {
        (
            prop::collection::vec(0.5f64..2.0, p),
            prop::collection::vec(0.02f64..0.05, p - 1),
            -0.5f64..0.5,
        )
            .prop_map(|(amps, gaps, start)| {
                let mut nodes = vec![start];
                for g in gaps {
                    nodes.push(nodes.last().unwrap() + g);
                }
                SpikeSignal::positive(&amps, &nodes).unwrap()
            })
    })
}

/// `Σ a_j t_j^k` with `t = (x − mid)·Ω`, straight from the definition.
fn frame_moments(f: &SpikeSignal, mid: f64, omega: f64, k_max: usize) -> Vec<f64> {
    let a = f.real_amplitudes().unwrap();
    (0..=k_max)
        .map(|k| {
            f.nodes()
                .iter()
                .zip(&a)
                .map(|(x, w)| w * ((x - mid) * omega).powi(k as i32))
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn prony_inverts_the_moment_map(f in cluster()) {
        let p = f.len();
        let a = f.real_amplitudes().unwrap();
        // unit frame keeps the Hankel system well conditioned
        let lo = f.nodes()[0];
        let hi = f.nodes()[p - 1];
        let mid = 0.5 * (lo + hi);
        let scale = 0.5 * (hi - lo);
        let unit: Vec<f64> = f.nodes().iter().map(|x| (x - mid) / scale).collect();
        let mu: Vec<f64> = (0..2 * p)
            .map(|k| unit.iter().zip(&a).map(|(t, w)| w * t.powi(k as i32)).sum())
            .collect();
        let g = prony_from_moments(&mu).unwrap();
        let b = g.real_amplitudes().unwrap();
        for j in 0..p {
            prop_assert!((g.nodes()[j] - unit[j]).abs() < 1e-8);
            prop_assert!((b[j] - a[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_shift_is_the_identity(f in cluster(), omega in 2.0f64..20.0) {
        let g = perturb_cluster(&f, 0.0, omega).unwrap();
        let (a, b) = (f.real_amplitudes().unwrap(), g.real_amplitudes().unwrap());
        for j in 0..f.len() {
            prop_assert!((g.nodes()[j] - f.nodes()[j]).abs() < 1e-9);
            prop_assert!((b[j] - a[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn shift_matches_low_moments_and_moves_the_top_one(
        f in cluster(),
        omega in 2.0f64..20.0,
        mag in -8.0f64..-4.0,
        negative in any::<bool>(),
    ) {
        let p = f.len();
        let eps_tilde = if negative { -1.0 } else { 1.0 } * 10f64.powf(mag);
        let g = perturb_cluster(&f, eps_tilde, omega).unwrap();
        prop_assert!(g.is_positive());
        let mid = 0.5 * (f.nodes()[0] + f.nodes()[p - 1]);
        let mf = frame_moments(&f, mid, omega, 2 * p - 1);
        let mg = frame_moments(&g, mid, omega, 2 * p - 1);
        let a = f.real_amplitudes().unwrap();
        for k in 0..=2 * p - 2 {
            let scale: f64 = f.nodes().iter().zip(&a)
                .map(|(x, w)| w * ((x - mid) * omega).abs().powi(k as i32))
                .sum();
            prop_assert!((mg[k] - mf[k]).abs() <= 1e-9 * scale.max(eps_tilde.abs()));
        }
        let shift = mg[2 * p - 1] - mf[2 * p - 1];
        prop_assert!((shift - eps_tilde).abs() <= 1e-4 * eps_tilde.abs());
        prop_assert!(interleaves(f.nodes(), g.nodes()));
    }

    #[test]
    fn interleaving_is_symmetric(
        a in prop::collection::vec(-1.0f64..1.0, 1..5),
        b in prop::collection::vec(-1.0f64..1.0, 1..5),
    ) {
        prop_assert_eq!(interleaves(&a, &b), interleaves(&b, &a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairs_respect_the_fourier_budget(
        h in 0.004f64..0.04,
        kappa in 1usize..=2,
        eps_exp in -8.0f64..-4.0,
        seed in any::<u64>(),
    ) {
        let spec = ClusterSpec {
            d: 3, p: 2, h, big_t: 1.0, tau: 1.0, eta: 0.3, kappa,
            m_lower: 1.0, m_upper: 2.0, centered: false,
        };
        let f = make_cluster_signal(&spec, &AmplitudeSource::UniformRandom, seed).unwrap();
        let eps = 10f64.powf(eps_exp);
        let omega = 10.0;
        let pair = build_adversarial_pair(&f, &spec, eps, omega, 512).unwrap();
        prop_assert!(pair.positive && pair.interleaved);
        prop_assert_eq!(pair.epsilon_tilde, eps * 0.5f64.powi(pair.halvings as i32));
        let sup = (0..512)
            .map(|k| -omega + 2.0 * omega * k as f64 / 511.0)
            .map(|s| (fourier_at(&pair.perturbed, s) - fourier_at(&f, s)).norm())
            .fold(0.0, f64::max);
        prop_assert!(sup <= eps);
        prop_assert!((sup - pair.sup_norm_achieved).abs() <= 1e-12 * (1.0 + sup));
        prop_assert!(pair.displacement_x > 0.0 && pair.displacement_a > 0.0);
    }
}
