use super::*;
use proptest::prelude::*;

const E: f64 = std::f64::consts::E;

fn e(k: f64) -> f64 {
    (-k).exp()
}

fn log_pair(a1: f64, sign: f64, a2: f64) -> CoefficientSpec {
    CoefficientSpec::new(
        FunctionSpec::power_log(a1, sign),
        FunctionSpec::power_log(a2, 1.0),
        DEFAULT_DELTA,
    )
    .unwrap()
}

fn critical() -> CoefficientSpec {
    log_pair(1.0, -1.0, 0.2)
}

#[test]
fn evaluates_named_examples() {
    let spec = log_pair(0.5, -1.0, 0.2);
    let v = spec.eval_b(e(4.0)).unwrap();
    assert!((v - (-2.0 * e(4.0))).abs() < 1e-16);
    assert!((v + 0.036631).abs() < 1e-6);
    assert_eq!(spec.eval_b(0.0).unwrap(), 0.0);
    assert_eq!(spec.eval_sigma(0.0).unwrap(), 0.0);
    let s = spec.eval_sigma(1.0 / E).unwrap();
    assert!((s - 0.367879).abs() < 1e-6);
    assert!((s - 1.0 / E).abs() < 1e-15);
    assert!(spec.eval_b(f64::NAN).is_err());
}

#[test]
fn tails_are_continuous_at_delta_and_one() {
    let spec = CoefficientSpec::new(
        FunctionSpec::power_log(0.5, 1.0).with_tail(Tail::LogSuperlinear),
        FunctionSpec::power_log(0.2, 1.0).with_tail(Tail::LogQuarterSuperlinear),
        0.2,
    )
    .unwrap();
    for f in [spec.b(), spec.sigma()] {
        for knot in [0.2, 1.0] {
            let h = 1e-9;
            assert!((f.value(knot + h) - f.value(knot - h)).abs() < 1e-7);
        }
        // derivative matches a central difference away from the knots
        for z in [0.05, 0.5, 3.0, 40.0] {
            let h = 1e-6 * z;
            let fd = (f.value(z + h) - f.value(z - h)) / (2.0 * h);
            assert!((fd - f.derivative(z)).abs() < 1e-5 * fd.abs().max(1.0), "{z}");
        }
    }
}

#[test]
fn sin_profile_derivative() {
    let f = ScalarFn::new(FunctionSpec::power_log_sin(0.5), DEFAULT_DELTA).unwrap();
    for z in [0.05, 0.1, 0.3] {
        let h = 1e-7 * z;
        let fd = (f.value(z + h) - f.value(z - h)) / (2.0 * h);
        assert!((fd - f.derivative(z)).abs() < 1e-4 * fd.abs().max(1.0), "{z}");
        assert!(f.derivative_envelope(z) >= f.derivative(z).abs());
    }
}

#[test]
fn eps_slopes_match_closed_forms() {
    let spec = log_pair(0.5, 1.0, 0.2);
    let r = regularize_eps(&spec, e(4.0)).unwrap();
    assert!((r.eps_slopes().0 - 2.0).abs() < 1e-14);
    let z = 0.3 * e(4.0);
    assert!((r.drift(z) - 2.0 * z).abs() < 1e-16);
    assert_eq!(r.drift(e(4.0)), spec.b().value(e(4.0)));

    let r = regularize_eps(&spec, e(32.0)).unwrap();
    assert!((r.eps_slopes().1 - 2.0).abs() < 1e-14);
}

#[test]
fn eps_rejects_out_of_range() {
    let spec = log_pair(0.5, 1.0, 0.2);
    assert!(regularize_eps(&spec, DEFAULT_DELTA).is_err());
    assert!(regularize_eps(&spec, 0.0).is_err());
    assert!(regularize_eps(&spec, 0.9).is_err());
}

#[test]
fn eps_growth_constant_is_the_knot_slope() {
    let spec = log_pair(0.5, 1.0, 0.2);
    let r = regularize_eps(&spec, e(4.0)).unwrap();
    let c = r.b_constants();
    // calculus oracle: |L^½ − ½L^{−½}| ≤ 1.75 on [ε, δ], tail slope ½
    assert!((c.lipschitz - 2.0).abs() < 0.02, "{c:?}");
    assert!(c.lipschitz >= 2.0);
    assert!((c.growth - 2.0).abs() < 0.02);
}

#[test]
fn linear_constants_are_exact() {
    let a = 2.5;
    let f = ScalarFn::new(FunctionSpec::linear(a), 0.25).unwrap();
    let c = f.growth_constants().unwrap();
    assert!((c.lipschitz - a).abs() < 1e-12);
    assert!((c.growth - a).abs() < 1e-12);
    assert!((c.sup_near_zero - a * 0.25).abs() < 1e-12);
}

#[test]
fn base_constants_are_infinite_where_expected() {
    let spec = CoefficientSpec::new(
        FunctionSpec::power_log(0.5, -1.0),
        FunctionSpec::power_log(0.2, 1.0).with_tail(Tail::LogQuarterSuperlinear),
        DEFAULT_DELTA,
    )
    .unwrap();
    let (b, s) = spec.growth_constants().unwrap();
    assert!(b.lipschitz.is_finite() && b.growth.is_infinite());
    assert!(s.lipschitz.is_infinite());
    // tail slope at δ = e^{-1}: −(1 − ½)
    assert!((b.lipschitz - 0.5).abs() < 0.005);
}

#[test]
fn alpha_collapses_for_unit_anchor() {
    let spec = critical();
    for alpha in [0.3, 0.7, 0.95] {
        let r = interpolate_alpha(&spec, alpha).unwrap();
        for z in [1e-8f64, 1e-3, 0.05, 0.3] {
            let expected = -z * (-z.ln()).powf(alpha);
            assert!((r.drift(z) - expected).abs() < 1e-14 * expected.abs().max(1e-300));
        }
    }
}

#[test]
fn alpha_fixes_delta_exactly() {
    let spec = critical();
    let delta = spec.delta();
    for i in 1..=9 {
        let r = interpolate_alpha(&spec, i as f64 / 10.0).unwrap();
        assert_eq!(r.drift(delta), spec.b().value(delta));
    }
}

#[test]
fn alpha_tends_to_base() {
    let spec = critical();
    let z = 1e-3;
    let gaps: Vec<f64> = [0.9, 0.99, 0.999, 0.9999]
        .iter()
        .map(|&a| (interpolate_alpha(&spec, a).unwrap().drift(z) - spec.b().value(z)).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(gaps[3] < 1e-5);
}

#[test]
fn alpha_precondition_failures() {
    let sin = CoefficientSpec::new(
        FunctionSpec::power_log_sin(0.5),
        FunctionSpec::power_log(0.2, 1.0),
        DEFAULT_DELTA,
    )
    .unwrap();
    assert!(matches!(interpolate_alpha(&sin, 0.5), Err(Error::Precondition(_))));

    // |b(z)|/z grows away from zero: ratio condition fails
    let table = MonotoneCubic::new(vec![0.0, 0.2, 0.5], vec![0.0, -0.04, -0.25]).unwrap();
    let quad = CoefficientSpec::new(
        FunctionSpec::from(Profile::Table(table)),
        FunctionSpec::power_log(0.2, 1.0),
        0.4,
    )
    .unwrap();
    let err = interpolate_alpha(&quad, 0.5).unwrap_err().to_string();
    assert!(err.contains("|b(z)|/z"), "{err}");

    assert!(interpolate_alpha(&critical(), 1.0).is_err());
    assert!(CoefficientSpec::new(
        FunctionSpec::power_log_sin(1.0),
        FunctionSpec::power_log(0.2, 1.0),
        DEFAULT_DELTA
    )
    .is_err());
}

#[test]
fn truncation_identity_and_plateau() {
    let spec = CoefficientSpec::new(
        FunctionSpec::linear(0.0).with_tail(Tail::LogSuperlinear),
        FunctionSpec::power_log(0.2, 1.0).with_tail(Tail::LogQuarterSuperlinear),
        DEFAULT_DELTA,
    )
    .unwrap();
    let level = 10f64.exp();
    let r = truncate_m(&spec, level).unwrap();
    for z in [0.1, 2.0, 100.0, level] {
        assert_eq!(r.drift(z), spec.b().value(z));
        assert_eq!(r.diffusion(z), spec.sigma().value(z));
    }
    for z in [level * 1.0001, 1e6, 1e300] {
        assert_eq!(r.drift(z), spec.b().value(level));
    }
    let lip = r.b_constants().lipschitz;
    assert!((10.0..=12.0).contains(&lip), "{lip}");
    assert!((lip - 11.0).abs() < 0.01);
    let ls = r.sigma_constants().lipschitz;
    assert!(ls < 2.0 * 11f64.powf(0.25), "{ls}");
    assert!(truncate_m(&spec, 1.0).is_err());
}

#[test]
fn truncation_lipschitz_grows_like_log() {
    let spec = CoefficientSpec::new(
        FunctionSpec::linear(0.0).with_tail(Tail::LogSuperlinear),
        FunctionSpec::linear(0.0).with_tail(Tail::LogQuarterSuperlinear),
        DEFAULT_DELTA,
    )
    .unwrap();
    for k in [3.0, 6.0, 12.0] {
        let r = truncate_m(&spec, f64::exp(k)).unwrap();
        let b = r.b_constants().lipschitz;
        let s = r.sigma_constants().lipschitz;
        assert!((b - (k + 1.0)).abs() < 0.01 * (k + 1.0));
        let oracle = (1.0 + k).powf(0.25) - 1.0 + 0.25 * (1.0 + k).powf(-0.75);
        assert!((s - oracle).abs() < 0.01 * oracle);
    }
}

#[test]
fn eps_gap_examples() {
    let spec = log_pair(0.5, 1.0, 0.2);
    let eps = e(16.0);
    let r = regularize_eps(&spec, eps).unwrap();
    let gap = uniform_gap(&|z| r.drift(z), &|z| spec.b().value(z), 1.0).unwrap();
    // |b| is increasing on [0, ε], so sup_{[0,ε]} |b| = b(ε) = 4ε
    let sup_b = 4.0 * eps;
    assert!((sup_b - 4.5e-7).abs() < 1e-8);
    assert!(gap <= sup_b, "{gap}");
    assert!(gap <= 4.0 * sup_b);
    let zero = uniform_gap(&|z| spec.b().value(z), &|z| spec.b().value(z), 1.0).unwrap();
    assert_eq!(zero, 0.0);
}

#[test]
fn eps_ladder_gaps_shrink_and_ratios_stable() {
    let spec = log_pair(0.5, 1.0, 0.2);
    let mut last = f64::INFINITY;
    let mut ratios = Vec::new();
    for n in 2..=16 {
        let r = regularize_eps(&spec, e(n as f64)).unwrap();
        let gap = uniform_gap(&|z| r.drift(z), &|z| spec.b().value(z), 1.0).unwrap();
        assert!(gap < last, "n={n}");
        last = gap;
        if n >= 4 {
            ratios.push(r.eps_growth_ratios().unwrap().0.unwrap());
        }
    }
    assert!(last < 1e-6);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 1.1, "{ratios:?}");
}

#[test]
fn alpha_ladder_gaps_decrease() {
    let spec = critical();
    let gaps: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&a| {
            let r = interpolate_alpha(&spec, a).unwrap();
            uniform_gap(&|z| r.drift(z), &|z| spec.b().value(z), 2.0).unwrap()
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn rescaled_and_shifted_adapters() {
    let spec = log_pair(0.5, -1.0, 0.2);
    let r = regularize_eps(&spec, e(4.0)).unwrap();
    let k = 2.0;
    let v = Rescaled::new(&r, k);
    let u = 0.7;
    assert!((v.drift(u) - k.exp() * r.drift((-k).exp() * u)).abs() < 1e-15);
    let s = DriftShift { inner: &r, slope: 0.5 };
    assert_eq!(s.drift(0.3), r.drift(0.3) + 0.15);
    assert_eq!(s.diffusion(0.3), r.diffusion(0.3));
}

#[test]
fn rescaled_growth_constants_do_not_increase() {
    // L of e^k f(e^{-k}·) is a sup over a subset of the same difference quotients
    let spec = log_pair(0.5, -1.0, 0.2);
    let r = regularize_eps(&spec, e(4.0)).unwrap();
    for k in [1.0, 2.0, 3.0] {
        let v = Rescaled::new(&r, k);
        let zs = crate::numerics::geometric_grid(1e-6, 50.0, 4000);
        let lb = zs.iter().map(|&z| v.drift(z).abs() / z).fold(0.0, f64::max);
        let ls = zs.iter().map(|&z| v.diffusion(z).abs() / z).fold(0.0, f64::max);
        assert!(lb <= r.b_constants().growth * (1.0 + 1e-9));
        assert!(ls <= r.sigma_constants().growth * (1.0 + 1e-9));
    }
}

proptest! {
    #[test]
    fn eps_agrees_bitwise_above_eps(n in 2u32..30, z in 0.0f64..5.0, a1 in 0.05f64..1.0) {
        let spec = log_pair(a1, -1.0, 0.2);
        let eps = e(n as f64);
        let r = regularize_eps(&spec, eps).unwrap();
        let z = eps + z;
        prop_assert_eq!(r.drift(z).to_bits(), spec.b().value(z).to_bits());
        prop_assert_eq!(r.diffusion(z).to_bits(), spec.sigma().value(z).to_bits());
        prop_assert_eq!(r.drift(eps), spec.b().value(eps));
        prop_assert!(r.b_constants().lipschitz.is_finite());
        prop_assert!(r.sigma_constants().lipschitz.is_finite());
        prop_assert_eq!(r.drift(0.0), 0.0);
    }

    #[test]
    fn alpha_preserves_sign_and_is_monotone(a in 0.01f64..0.98, da in 0.001f64..0.02, z in 1e-12f64..0.3678) {
        let spec = critical();
        let lo = interpolate_alpha(&spec, a).unwrap();
        let hi = interpolate_alpha(&spec, (a + da).min(0.999)).unwrap();
        prop_assert!(lo.drift(z) < 0.0);
        prop_assert!(hi.drift(z) <= lo.drift(z) * (1.0 - 1e-14) || hi.drift(z) <= lo.drift(z));
    }

    #[test]
    fn alpha_monotone_positive_sign(a in 0.01f64..0.98, z in 1e-12f64..0.3678) {
        let spec = log_pair(1.0, 1.0, 0.2);
        let lo = interpolate_alpha(&spec, a).unwrap();
        let hi = interpolate_alpha(&spec, a + 0.01).unwrap();
        prop_assert!(lo.drift(z) > 0.0);
        prop_assert!(hi.drift(z) >= lo.drift(z) * (1.0 - 1e-14));
    }

    #[test]
    fn truncation_is_non_expansive(x in 0.0f64..200.0, y in 0.0f64..200.0, m in 1.5f64..100.0) {
        let spec = CoefficientSpec::new(
            FunctionSpec::power_log(0.5, 1.0).with_tail(Tail::LogSuperlinear),
            FunctionSpec::power_log(0.2, 1.0),
            DEFAULT_DELTA,
        ).unwrap();
        let r = truncate_m(&spec, m).unwrap();
        let lhs = (r.drift(x) - r.drift(y)).abs();
        let rhs = (spec.b().value(x.min(m)) - spec.b().value(y.min(m))).abs();
        prop_assert!(lhs <= rhs);
        prop_assert_eq!(r.drift(m + x), spec.b().value(m));
    }

    #[test]
    fn odd_extension(z in 1e-6f64..10.0) {
        let spec = log_pair(0.5, -1.0, 0.2);
        prop_assert_eq!(spec.b().value(-z), -spec.b().value(z));
        let r = regularize_eps(&spec, e(3.0)).unwrap();
        let small = z * e(3.0) / 20.0;
        prop_assert_eq!(r.drift(-small), -r.drift(small));
    }
}
