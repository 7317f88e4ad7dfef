use std::f64::consts::PI;

use super::*;
use crate::coefficients::{CoefficientSpec, FunctionSpec, DEFAULT_DELTA};
use crate::kernel::convolve_initial;
use crate::numerics::pairwise_mean;
use proptest::prelude::*;

fn pair(b: FunctionSpec, sigma: FunctionSpec) -> CoefficientSpec {
    CoefficientSpec::new(b, sigma, DEFAULT_DELTA).unwrap()
}

fn heat_only() -> CoefficientSpec {
    pair(FunctionSpec::constant(0.0), FunctionSpec::constant(0.0))
}

fn cos_amplitude(field: &[f64], k: usize) -> f64 {
    let n = field.len() as f64;
    2.0 * pairwise_mean(
        &field
            .iter()
            .enumerate()
            .map(|(j, u)| u * (2.0 * PI * k as f64 * j as f64 / n).cos())
            .collect::<Vec<_>>(),
    )
}

#[test]
fn cos_mode_decay_matches_semigroup() {
    let grid = TorusGrid::new(256, 1e-5, 0.1).unwrap();
    let u0 = grid.sample(|x| 1.0 + (2.0 * PI * x).cos());
    let traj = simulate(&heat_only(), &u0, &grid, &NoiseStream::new(1, 0), 1000).unwrap();
    let exact = convolve_initial(&u0, &grid, 0.1).unwrap();
    let decay = (-2.0 * PI * PI * 0.1f64).exp();
    let got = cos_amplitude(traj.final_field(), 1);
    assert!((got - decay).abs() < 0.01 * decay, "{got} vs {decay}");
    for (a, b) in traj.final_field().iter().zip(&exact) {
        assert!((a - b).abs() < 0.01 * decay);
    }
}

#[test]
fn linear_part_matches_closed_form_damping() {
    let n = 64;
    let grid = TorusGrid::new(n, 1e-3, 0.05).unwrap();
    for k in [1usize, 3, 10] {
        let u0 = grid.sample(|x| 1.0 + 0.5 * (2.0 * PI * k as f64 * x).cos());
        let traj = simulate(&heat_only(), &u0, &grid, &NoiseStream::new(1, 0), 50).unwrap();
        let dx = grid.dx();
        let s = (PI * k as f64 / n as f64).sin();
        let per_step = 1.0 / (1.0 + grid.dt() * (2.0 / (dx * dx)) * s * s);
        let expected = 0.5 * per_step.powi(grid.steps() as i32);
        let got = cos_amplitude(traj.final_field(), k);
        assert!((got - expected).abs() < 1e-13, "k={k}: {got} vs {expected}");
    }
}

#[test]
fn constant_drift_grows_mean_linearly() {
    let c = 0.7;
    let spec = pair(FunctionSpec::constant(c), FunctionSpec::constant(0.0));
    let grid = TorusGrid::new(32, 1e-3, 0.2).unwrap();
    let u0 = grid.sample(|x| 1.0 + 0.3 * (6.0 * PI * x).sin().abs());
    let traj = simulate(&spec, &u0, &grid, &NoiseStream::new(5, 0), 10).unwrap();
    let m0 = pairwise_mean(&u0);
    for (m, mean) in traj.stats().mean.iter().enumerate() {
        let expected = m0 + c * m as f64 * grid.dt();
        assert!((mean - expected).abs() < 1e-13, "step {m}");
    }
}

#[test]
fn heat_step_preserves_mean() {
    let grid = TorusGrid::new(128, 1e-3, 0.1).unwrap();
    let u0 = grid.sample(|x| (x * 13.7).fract() + 0.1 * (x * 91.3).sin().abs());
    let traj = simulate(&heat_only(), &u0, &grid, &NoiseStream::new(9, 0), 100).unwrap();
    let m0 = pairwise_mean(&u0);
    for mean in &traj.stats().mean {
        assert!((mean - m0).abs() < 1e-14);
    }
}

/// Exact variance of the discrete additive-noise field at a node:
/// `Δt Σ_k Σ_{r=1}^{M} λ_k^{2r}` with `λ_k` the implicit-step multipliers.
fn discrete_additive_variance(grid: &TorusGrid) -> f64 {
    let m = grid.steps() as i32;
    implicit_symbol(grid)
        .iter()
        .map(|&l| {
            let q = l * l;
            if q == 1.0 {
                m as f64
            } else {
                q * (1.0 - q.powi(m)) / (1.0 - q)
            }
        })
        .sum::<f64>()
        * grid.dt()
}

#[test]
fn additive_noise_variance_matches_discrete_oracle() {
    let grid = TorusGrid::new(64, 1e-4, 0.01).unwrap();
    let spec = pair(FunctionSpec::constant(0.0), FunctionSpec::constant(1.0));
    let oracle = discrete_additive_variance(&grid);
    assert!((additive_noise_variance(&grid, grid.steps()) - oracle).abs() < 1e-15);
    // continuum value √(t/π) for reference; discretisation bias is small
    assert!((oracle - (0.01 / PI).sqrt()).abs() < 0.05 * oracle);
    let u0 = vec![0.0; 64];
    let per_replica: Vec<f64> = (0..200)
        .map(|r| {
            let t = simulate(&spec, &u0, &grid, &NoiseStream::new(77, r), 100).unwrap();
            pairwise_mean(&t.final_field().iter().map(|u| u * u).collect::<Vec<_>>())
        })
        .collect();
    let (mean, var) = crate::numerics::mean_variance(&per_replica);
    let se = (var / per_replica.len() as f64).sqrt();
    assert!((mean - oracle).abs() < 3.0 * se, "{mean} vs {oracle} (se {se})");
}

#[test]
fn time_order_from_richardson_triplet() {
    let grid = |dt: f64| TorusGrid::new(64, dt, 0.1).unwrap();
    let amp = |dt: f64| {
        let g = grid(dt);
        let u0 = g.sample(|x| 1.0 + (2.0 * PI * x).cos());
        let t = simulate(&heat_only(), &u0, &g, &NoiseStream::new(0, 0), g.steps()).unwrap();
        cos_amplitude(t.final_field(), 1)
    };
    let (a, b, c) = (amp(2e-3), amp(1e-3), amp(5e-4));
    let order = ((a - b) / (b - c)).log2();
    assert!(order >= 0.9, "{order}");
}

#[test]
fn determinism_and_identical_pairs() {
    let spec = pair(FunctionSpec::power_log(0.5, -1.0), FunctionSpec::power_log(0.2, 1.0));
    let r = crate::coefficients::regularize_eps(&spec, 1e-3).unwrap();
    let grid = TorusGrid::new(32, 1e-3, 0.05).unwrap();
    let u0 = vec![0.5; 32];
    let noise = NoiseStream::new(3, 2);
    let a = simulate(&r, &u0, &grid, &noise, 5).unwrap();
    let b = simulate(&r, &u0, &grid, &noise, 5).unwrap();
    assert_eq!(a, b);
    let (p, q) =
        simulate_pair_common_noise(&r, &r, &u0, &u0, &grid, &noise, 5, 10.0).unwrap();
    assert_eq!(p, q);
    assert_eq!(p, a);
}

#[test]
fn pair_rejects_unordered_inputs() {
    let grid = TorusGrid::new(16, 1e-3, 0.01).unwrap();
    let lo = pair(FunctionSpec::linear(-1.0), FunctionSpec::constant(0.1));
    let hi = pair(FunctionSpec::linear(1.0), FunctionSpec::constant(0.1));
    let u0 = vec![1.0; 16];
    let noise = NoiseStream::new(0, 0);
    let err = simulate_pair_common_noise(&hi, &lo, &u0, &u0, &grid, &noise, 1, 2.0)
        .unwrap_err()
        .to_string();
    assert!(err.contains("z = "), "{err}");
    let other_sigma = pair(FunctionSpec::linear(1.0), FunctionSpec::constant(0.2));
    assert!(simulate_pair_common_noise(&lo, &other_sigma, &u0, &u0, &grid, &noise, 1, 2.0).is_err());
    let bigger = vec![1.1; 16];
    assert!(simulate_pair_common_noise(&lo, &hi, &bigger, &u0, &grid, &noise, 1, 2.0).is_err());
    assert!(simulate_pair_common_noise(&lo, &hi, &u0, &bigger, &grid, &noise, 1, 2.0).is_ok());
}

#[test]
fn ordered_pairs_stay_ordered() {
    let spec = pair(FunctionSpec::power_log(0.5, -1.0), FunctionSpec::power_log(0.2, 1.0));
    let r = crate::coefficients::regularize_eps(&spec, 1e-3).unwrap();
    let grid = TorusGrid::new(64, 1e-4, 0.02).unwrap();
    let hi = vec![1.0; 64];
    let lo = vec![0.9; 64];
    for rep in 0..5 {
        let (a, b) = simulate_pair_common_noise(
            &r, &r, &lo, &hi, &grid, &NoiseStream::new(11, rep), 10, 10.0,
        )
        .unwrap();
        for ((_, x), (_, y)) in a.snapshots().zip(b.snapshots()) {
            for (u, v) in x.iter().zip(y) {
                assert!(u - v <= 1e-8);
            }
        }
    }
}

#[test]
fn restart_continuations() {
    let spec = pair(FunctionSpec::power_log(0.5, -1.0), FunctionSpec::power_log(0.2, 1.0));
    let r = crate::coefficients::regularize_eps(&spec, 1e-3).unwrap();
    let grid = TorusGrid::new(32, 1e-3, 0.04).unwrap();
    let u0 = vec![0.8; 32];
    let noise = NoiseStream::new(4, 1);
    let full = simulate(&r, &u0, &grid, &noise, 10).unwrap();

    let again = restart_from(&full, 0, &r, &noise, grid.steps(), SimOptions { stride: 10, ..Default::default() }).unwrap();
    assert_eq!(again, full);

    // splitting at a snapshot reproduces the second half exactly
    let tail = restart_from(&full, 20, &r, &noise, 20, SimOptions { stride: 10, ..Default::default() }).unwrap();
    assert_eq!(tail.final_field(), full.final_field());
    assert_eq!(tail.running_min(), &full.running_min()[20..]);

    // noise-free continuation does not depend on the stream
    let heat = heat_only();
    let base = simulate(&heat, &grid.sample(|x| 1.0 + x * (1.0 - x)), &grid, &noise, 20).unwrap();
    let fresh = restart_from(&base, 20, &heat, &NoiseStream::new(99, 99), 20, SimOptions::default()).unwrap();
    let direct = simulate(&heat, base.snapshot(20).unwrap(), &grid.with_steps(20).unwrap(), &noise, 1).unwrap();
    assert_eq!(fresh.final_field(), direct.final_field());

    assert!(matches!(
        restart_from(&full, 7, &r, &noise, 5, SimOptions::default()),
        Err(Error::NotSnapshotted { step: 7, stride: 10 })
    ));
}

#[test]
fn blowup_is_reported_with_step() {
    let spec = pair(FunctionSpec::linear(1e200), FunctionSpec::constant(0.0));
    let grid = TorusGrid::new(8, 1e-3, 0.01).unwrap();
    let err = simulate(&spec, &[1.0; 8], &grid, &NoiseStream::new(0, 0), 1).unwrap_err();
    assert!(matches!(err, Error::Blowup { step: 2 }), "{err}");
}

#[test]
fn rejects_bad_initial_data() {
    let grid = TorusGrid::new(8, 1e-3, 0.01).unwrap();
    let mut u0 = vec![1.0; 8];
    u0[3] = -1e-3;
    assert!(matches!(
        simulate(&heat_only(), &u0, &grid, &NoiseStream::new(0, 0), 1),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        simulate(&heat_only(), &[1.0; 4], &grid, &NoiseStream::new(0, 0), 1),
        Err(Error::GridMismatch { .. })
    ));
}

#[test]
fn stop_rules_end_runs() {
    let spec = pair(FunctionSpec::linear(-1.0), FunctionSpec::constant(0.0));
    let grid = TorusGrid::new(8, 1e-3, 2.0).unwrap();
    let opts = SimOptions { stride: 100, stop: StopRule::MinAtOrBelow(0.5), ..Default::default() };
    let t = simulate_with(&spec, &[1.0; 8], &grid, &NoiseStream::new(0, 0), opts).unwrap();
    assert!(t.stopped_early());
    let last = t.steps();
    assert!(t.running_min()[last] <= 0.5 && t.running_min()[last - 1] > 0.5);
    assert_eq!(t.snapshot_steps().last(), Some(&last));
    // ln 2 / Δt steps for u' = −u with explicit drift: (1 − Δt)^m ≤ ½
    let expected = ((0.5f64).ln() / (1.0 - 1e-3f64).ln()).ceil() as usize;
    assert_eq!(last, expected);
}

#[test]
fn export_round_trip() {
    let spec = pair(FunctionSpec::constant(0.0), FunctionSpec::constant(1.0));
    let grid = TorusGrid::new(16, 1e-3, 0.01).unwrap();
    let t = simulate(&spec, &[0.0; 16], &grid, &NoiseStream::new(8, 0), 3).unwrap();
    let mut bytes = Vec::new();
    t.write_binary(&mut bytes).unwrap();
    assert_eq!(bytes.len(), 32 + 8 * 16 * t.snapshot_steps().len());
    let back = read_binary(bytes.as_slice()).unwrap();
    assert_eq!(back.n, 16);
    assert_eq!(back.dt, 1e-3);
    assert_eq!(back.stride, 3);
    assert_eq!(back.fields.len(), 5); // 0, 3, 6, 9, 10
    assert_eq!(back.fields.last().unwrap().as_slice(), t.final_field());
    bytes.push(0);
    assert!(read_binary(bytes.as_slice()).is_err());

    let mut csv = Vec::new();
    t.write_summary_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,min,max,mean,variance"));
    assert_eq!(text.lines().count(), grid.steps() + 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extrema_consistent_with_snapshots(seed in 0u64..1000, stride in 1usize..7) {
        let spec = pair(FunctionSpec::power_log(0.5, -1.0), FunctionSpec::power_log(0.2, 1.0));
        let r = crate::coefficients::regularize_eps(&spec, 1e-3).unwrap();
        let grid = TorusGrid::new(16, 1e-3, 0.02).unwrap();
        let t = simulate(&r, &[0.6; 16], &grid, &NoiseStream::new(seed, 0), stride).unwrap();
        prop_assert_eq!(t.running_min().len(), grid.steps() + 1);
        for (i, f) in t.snapshots() {
            let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(lo, t.running_min()[i]);
            prop_assert_eq!(hi, t.running_max()[i]);
            prop_assert!(i % stride == 0 || i == grid.steps());
        }
    }

    #[test]
    fn initial_order_preserved(seed in 0u64..1000, gap in 0.0f64..0.3) {
        let spec = pair(FunctionSpec::power_log(0.5, -1.0), FunctionSpec::power_log(0.2, 1.0));
        let r = crate::coefficients::regularize_eps(&spec, 1e-2).unwrap();
        let grid = TorusGrid::new(32, 1e-4, 0.005).unwrap();
        let hi = grid.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).sin());
        let lo: Vec<f64> = hi.iter().map(|v| (v - gap).max(0.0)).collect();
        let (a, b) = simulate_pair_common_noise(&r, &r, &lo, &hi, &grid, &NoiseStream::new(seed, 1), 5, 10.0).unwrap();
        for ((_, x), (_, y)) in a.snapshots().zip(b.snapshots()) {
            for (u, v) in x.iter().zip(y) {
                prop_assert!(u - v <= 1e-8);
            }
        }
    }
}
