use proptest::prelude::*;

use torus_she::coefficients::{regularize_eps, CoefficientSpec, DriftShift, FunctionSpec, DEFAULT_DELTA};
use torus_she::localization::{glue, scan_tau};
use torus_she::solver::{simulate, simulate_pair_common_noise, NoiseStream};
use torus_she::verification::max_order_violation;
use torus_she::TorusGrid;

fn subcritical() -> CoefficientSpec {
    CoefficientSpec::new(FunctionSpec::power_log(0.5, -1.0), FunctionSpec::power_log(0.2, 1.0), DEFAULT_DELTA).unwrap()
}

fn grid() -> TorusGrid {
    TorusGrid::new(32, 1e-4, 4e-3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn common_noise_preserves_order(seed in any::<u64>(), shift in 0.0f64..2.0, scale in 0.5f64..1.0) {
        let spec = subcritical();
        let upper = DriftShift { inner: &spec, slope: shift };
        let g = grid();
        let u2: Vec<f64> = g.nodes().iter().map(|x| 0.5 + 0.4 * (std::f64::consts::TAU * x).sin()).collect();
        let u1: Vec<f64> = u2.iter().map(|u| u * scale).collect();
        let noise = NoiseStream::new(seed, 0);
        let (a, b) = simulate_pair_common_noise(&spec, &upper, &u1, &u2, &g, &noise, 1, 10.0).unwrap();
        prop_assert!(max_order_violation(&a, &b).unwrap() <= 1e-8);
    }

    #[test]
    fn eps_levels_glue_exactly(seed in any::<u64>(), replica in 0u64..1000) {
        let spec = subcritical();
        let g = grid();
        let u0 = vec![0.15; g.n()];
        let noise = NoiseStream::new(seed, replica);
        let eps = [0.1, 0.05, 0.02];
        let trajs: Vec<_> = eps.iter().map(|&e| simulate(&regularize_eps(&spec, e).unwrap(), &u0, &g, &noise, 1).unwrap()).collect();
        let levels: Vec<(f64, &_)> = eps.iter().copied().zip(trajs.iter()).collect();
        prop_assert!(glue(&levels).is_ok());
        let taus: Vec<_> = levels.iter().map(|(e, t)| scan_tau(t, *e)).collect();
        prop_assert!(taus.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn runs_are_pure_functions_of_the_stream(seed in any::<u64>(), replica in any::<u64>()) {
        let spec = subcritical();
        let g = grid();
        let u0 = vec![1.0; g.n()];
        let noise = NoiseStream::new(seed, replica);
        let a = simulate(&spec, &u0, &g, &noise, 7).unwrap();
        let b = simulate(&spec, &u0, &g, &noise, 7).unwrap();
        prop_assert_eq!(a, b);
    }
}
