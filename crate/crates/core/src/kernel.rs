//! Heat kernel of `½∂²` on the unit torus.
//!
//! The kernel is the wrapped Gaussian
//!
//! ```text
//! G_t(x) = Σ_{k∈ℤ} (2πt)^{-1/2} exp(−(x−k)²/(2t))
//!        = 1 + 2 Σ_{k≥1} exp(−2π²k²t) cos(2πkx)
//! ```
//!
//! The image sum converges fast for small `t` and the Fourier (theta) series
//! for large `t`; the two are exchanged at the self-dual scale `t = 1/(2π)`.
//! Both truncations are chosen from `t` and the requested absolute tolerance
//! using geometric bounds on the Gaussian tails.

use std::f64::consts::PI;

use crate::error::{invalid, require_positive, Error, Result};
use crate::grid::TorusGrid;
use crate::numerics::pairwise_mean;
use crate::spectral::{wavenumber, CirculantOperator};

/// Time above which the Fourier series is used.
pub const FOURIER_SWITCH: f64 = 1.0 / (2.0 * PI);

/// Largest quadrature resolution the mass and L² checks will try.
const MAX_QUADRATURE_POINTS: usize = 1 << 22;

/// A validated kernel evaluation request.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelQuery {
    pub t: f64,
    pub x: f64,
    pub tol: f64,
}

impl KernelQuery {
    /// Validates `t`, `tol` and wraps `x` into `[0, 1)`.
    pub fn new(t: f64, x: f64, tol: f64) -> Result<Self> {
        require_positive("t", t)?;
        require_positive("tol", tol)?;
        if !x.is_finite() {
            return Err(invalid("x", format!("must be finite, got {x}")));
        }
        Ok(Self {
            t,
            x: wrap(x),
            tol,
        })
    }
}

/// Representative of `x` in `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the torus, `min(|x−y|, 1−|x−y|)`.
pub fn torus_distance(x: f64, y: f64) -> f64 {
    let d = wrap(x - y);
    d.min(1.0 - d)
}

/// Number of image pairs `J` such that the omitted images (pairs with index
/// `> J`) contribute less than `tol` for every `x ∈ [0, 1)`.
///
/// Pair `j` holds the images at `−j` and `1 + j`, both at distance `≥ j`
/// from `x`, so the omitted mass is at most
/// `2 (2πt)^{-1/2} e^{−(J+1)²/(2t)} / (1 − e^{−(2J+3)/(2t)})`.
pub fn image_cutoff(t: f64, tol: f64) -> usize {
    let pre = 2.0 / (2.0 * PI * t).sqrt();
    let start = (2.0 * t * (pre / tol).max(1.0).ln()).sqrt().ceil() as usize;
    let mut j = start.saturating_sub(1);
    loop {
        let next = (j + 1) as f64;
        let ratio = (-(2.0 * next + 1.0) / (2.0 * t)).exp();
        let bound = pre * (-(next * next) / (2.0 * t)).exp() / (1.0 - ratio);
        if bound < tol || j > 100_000 {
            return j;
        }
        j += 1;
    }
}

/// Number of Fourier modes `K` such that the omitted modes contribute less
/// than `tol`: `2 q^{(K+1)²} / (1 − q^{2K+3}) < tol` with `q = e^{−2π²t}`.
pub fn fourier_cutoff(t: f64, tol: f64) -> usize {
    let a = 2.0 * PI * PI * t;
    let mut k = ((2.0 / tol).max(1.0).ln() / a).sqrt().floor() as usize;
    k = k.saturating_sub(1);
    loop {
        let next = (k + 1) as f64;
        let bound = 2.0 * (-a * next * next).exp() / (1.0 - (-a * (2.0 * next + 1.0)).exp());
        if bound < tol || k > 1_000_000 {
            return k;
        }
        k += 1;
    }
}

/// Image sum with an explicit number of pairs. `x` must already be wrapped.
///
/// Summands are grouped in pairs `(−j, 1+j)`, so evaluations at `x` and at
/// `1 − x` (when `1 − x` is exact) add identical numbers in identical order.
pub fn heat_kernel_images(t: f64, x: f64, pairs: usize) -> f64 {
    let inv = 1.0 / (2.0 * t);
    let mut acc = 0.0;
    for j in (0..=pairs).rev() {
        let jf = j as f64;
        let a = x + jf;
        let b = (x - 1.0) - jf;
        acc += (-a * a * inv).exp() + (-b * b * inv).exp();
    }
    acc / (2.0 * PI * t).sqrt()
}

/// Fourier series with an explicit number of modes. `x` must already be
/// wrapped.
pub fn heat_kernel_fourier(t: f64, x: f64, modes: usize) -> f64 {
    let d = x.min(1.0 - x);
    let a = 2.0 * PI * PI * t;
    let mut acc = 0.0;
    for k in (1..=modes).rev() {
        let kf = k as f64;
        acc += (-a * kf * kf).exp() * (2.0 * PI * kf * d).cos();
    }
    1.0 + 2.0 * acc
}

/// `G_t(x)` to absolute accuracy `tol`.
pub fn heat_kernel(q: KernelQuery) -> f64 {
    let value = if q.t < FOURIER_SWITCH {
        heat_kernel_images(q.t, q.x, image_cutoff(q.t, q.tol))
    } else {
        heat_kernel_fourier(q.t, q.x, fourier_cutoff(q.t, q.tol))
    };
    value.max(0.0)
}

/// Convenience wrapper validating the arguments.
pub fn heat_kernel_at(t: f64, x: f64, tol: f64) -> Result<f64> {
    Ok(heat_kernel(KernelQuery::new(t, x, tol)?))
}

/// Gaussian heat kernel on the real line, `p_t(x) = (2πt)^{-1/2} e^{−x²/(2t)}`.
pub fn real_line_kernel(t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Ratio `G_t(x) / (2(1 + √(t/2π)) p_t(|x|))` with `|x|` the torus distance
/// to the origin. Values `≤ 1` mean the real-line kernel dominates.
pub fn real_line_domination_ratio(t: f64, x: f64, tol: f64) -> Result<f64> {
    let g = heat_kernel_at(t, x, tol)?;
    let d = torus_distance(x, 0.0);
    Ok(g / (2.0 * (1.0 + (t / (2.0 * PI)).sqrt()) * real_line_kernel(t, d)))
}

/// A quadrature value with the error bound it certifies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub tolerance: f64,
    pub points: usize,
}

/// Trapezoid nodes needed so that aliasing of a periodic function whose
/// Fourier coefficients decay like `e^{−a k²}` stays below `target`.
fn trapezoid_points(a: f64, prefactor: f64, target: f64) -> (usize, f64) {
    let mut n = 64usize;
    loop {
        let r = (-a * (n * n) as f64).exp();
        let alias = 2.0 * prefactor * r / (1.0 - r);
        if alias <= target || n >= MAX_QUADRATURE_POINTS {
            return (n, alias);
        }
        n *= 2;
    }
}

/// Integral of `G_t` over the torus by the composite trapezoid rule.
///
/// The rule is spectrally accurate for periodic integrands: its error is
/// the sum of the Fourier coefficients at multiples of the node count, which
/// is bounded and reported in [`Quadrature::tolerance`] together with the
/// kernel truncation and rounding contributions.
pub fn kernel_mass(t: f64, tol: f64) -> Result<Quadrature> {
    require_positive("t", t)?;
    require_positive("tol", tol)?;
    let (n, alias) = trapezoid_points(2.0 * PI * PI * t, 1.0, 1e-17);
    let values: Vec<f64> = (0..n)
        .map(|i| heat_kernel(KernelQuery { t, x: i as f64 / n as f64, tol }))
        .collect();
    let value = pairwise_mean(&values);
    let rounding = 64.0 * f64::EPSILON * value.abs();
    Ok(Quadrature {
        value,
        tolerance: alias + tol + rounding,
        points: n,
    })
}

/// Both sides of `∫₀¹ G_t(x−y)² dy = G_{2t}(0)` and the upper bound
/// `1 + √(2π)/√t` for the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Identity {
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub upper_bound: f64,
}

impl L2Identity {
    pub fn holds(&self) -> bool {
        (self.lhs - self.rhs).abs() <= self.tolerance && self.rhs <= self.upper_bound
    }
}

pub fn kernel_l2_identity(t: f64, tol: f64) -> Result<L2Identity> {
    require_positive("t", t)?;
    require_positive("tol", tol)?;
    // Fourier coefficients of G_t² decay like e^{−π²m²t} times a theta sum
    // bounded by 1 + 1/(2√(πt)).
    let theta = 1.0 + 0.5 / (PI * t).sqrt();
    let (n, alias) = trapezoid_points(PI * PI * t, theta, 1e-17);
    let peak = heat_kernel(KernelQuery { t, x: 0.0, tol });
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let g = heat_kernel(KernelQuery { t, x: i as f64 / n as f64, tol });
            g * g
        })
        .collect();
    let lhs = pairwise_mean(&values);
    let rhs = heat_kernel(KernelQuery {
        t: 2.0 * t,
        x: 0.0,
        tol,
    });
    let tolerance = alias + (2.0 * peak + tol) * tol + tol + 64.0 * f64::EPSILON * lhs.abs();
    Ok(L2Identity {
        lhs,
        rhs,
        tolerance,
        upper_bound: 1.0 + (2.0 * PI).sqrt() / t.sqrt(),
    })
}

/// Normalised kernel increments
///
/// ```text
/// time  = |G_t(x) − G_{t'}(x)| / (t^{−β/2} G_{2t'}(x) (t'−t)^{β/2})
/// space = |G_t(x) − G_t(y)|    / (t^{−β/2} (G_{2t}(x) + G_{2t}(y)) |x−y|^β)
/// ```
///
/// A uniform bound on both ratios over a sweep is an empirical value of the
/// universal constant in the kernel increment estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncrementRatios {
    pub time: f64,
    pub space: f64,
}

pub fn kernel_increment_check(
    t: f64,
    t_later: f64,
    x: f64,
    y: f64,
    beta: f64,
    tol: f64,
) -> Result<IncrementRatios> {
    require_positive("t", t)?;
    require_positive("tol", tol)?;
    if !(t_later >= t && t_later.is_finite()) {
        return Err(invalid("t_later", format!("must satisfy t <= t' < inf, got {t_later}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1], got {beta}")));
    }
    let (x, y) = (wrap(x), wrap(y));
    let g = |s: f64, z: f64| heat_kernel(KernelQuery { t: s, x: z, tol });
    let lead = t.powf(-beta / 2.0);

    let gap = t_later - t;
    let time = if gap == 0.0 {
        0.0
    } else {
        (g(t, x) - g(t_later, x)).abs() / (lead * g(2.0 * t_later, x) * gap.powf(beta / 2.0))
    };

    let dist = torus_distance(x, y);
    let space = if dist == 0.0 {
        0.0
    } else {
        (g(t, x) - g(t, y)).abs()
            / (lead * (g(2.0 * t, x) + g(2.0 * t, y)) * dist.powf(beta))
    };
    Ok(IncrementRatios { time, space })
}

/// Fourier multipliers of the heat semigroup on an `n`-point grid:
/// `e^{−2π²k²t}` for the signed wavenumber `k`.
pub fn semigroup_symbol(n: usize, t: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let kk = wavenumber(k, n);
            (-2.0 * PI * PI * kk * kk * t).exp()
        })
        .collect()
}

/// Deterministic part of the mild formulation, `∫ G_t(x−y) u₀(y) dy`, on the
/// grid.
///
/// The convolution is applied as a circulant operator diagonalised by the
/// discrete Fourier transform, with eigenvalues the kernel's Fourier
/// coefficients. Constants and the discrete mean are preserved to rounding
/// and the semigroup law holds to rounding.
pub fn convolve_initial(u0: &[f64], grid: &TorusGrid, t: f64) -> Result<Vec<f64>> {
    if u0.len() != grid.n() {
        return Err(Error::GridMismatch {
            expected: grid.n(),
            got: u0.len(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(u0.to_vec());
    }
    let mut out = u0.to_vec();
    CirculantOperator::new(semigroup_symbol(grid.n(), t)).apply(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: plain symmetric image sum over `|k| <= 50`.
    fn brute_force(t: f64, x: f64) -> f64 {
        (-50..=50)
            .map(|k| {
                let d = x - k as f64;
                (-d * d / (2.0 * t)).exp()
            })
            .sum::<f64>()
            / (2.0 * PI * t).sqrt()
    }

    #[test]
    fn long_time_limit_is_uniform() {
        let g = heat_kernel_at(10.0, 0.37, 1e-12).unwrap();
        assert!((g - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_brute_force_at_origin() {
        let oracle = brute_force(0.05, 0.0);
        assert!((oracle - 1.7843).abs() < 1e-4);
        let g = heat_kernel_at(0.05, 0.0, 1e-12).unwrap();
        assert!((g - oracle).abs() < 1e-12, "{g} vs {oracle}");
    }

    #[test]
    fn both_series_agree_near_switch() {
        for &t in &[0.1, FOURIER_SWITCH, 0.3] {
            for i in 0..20 {
                let x = i as f64 / 20.0;
                let a = heat_kernel_images(t, x, 40);
                let b = heat_kernel_fourier(t, x, 40);
                assert!((a - b).abs() < 1e-13, "t={t} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_invalid_queries() {
        assert!(heat_kernel_at(0.0, 0.1, 1e-12).is_err());
        assert!(heat_kernel_at(-1.0, 0.1, 1e-12).is_err());
        assert!(heat_kernel_at(f64::NAN, 0.1, 1e-12).is_err());
        assert!(heat_kernel_at(0.1, 0.1, 0.0).is_err());
        assert!(heat_kernel_at(0.1, f64::INFINITY, 1e-12).is_err());
    }

    #[test]
    fn wraps_inputs() {
        let a = heat_kernel_at(0.02, 0.25, 1e-12).unwrap();
        assert_eq!(a, heat_kernel_at(0.02, 1.25, 1e-12).unwrap());
        assert_eq!(a, heat_kernel_at(0.02, -0.75, 1e-12).unwrap());
    }

    #[test]
    fn mass_examples() {
        let m = kernel_mass(1e-3, 1e-13).unwrap();
        assert!((m.value - 1.0).abs() <= 1e-9);
        assert!((m.value - 1.0).abs() <= m.tolerance);
        let m = kernel_mass(1.0, 1e-14).unwrap();
        assert!((m.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn mass_stable_under_refinement_at_t_005() {
        // 4096-point trapezoid as the refined reference
        let reference = pairwise_mean(
            &(0..4096)
                .map(|i| heat_kernel_at(0.05, i as f64 / 4096.0, 1e-15).unwrap())
                .collect::<Vec<_>>(),
        );
        assert!((reference - 1.0).abs() < 1e-12);
        let m = kernel_mass(0.05, 1e-14).unwrap();
        assert!((m.value - reference).abs() < 1e-12);
    }

    #[test]
    fn l2_identity_examples() {
        let id = kernel_l2_identity(0.005, 1e-14).unwrap();
        let dominant = 1.0 / (4.0 * PI * 0.005).sqrt();
        assert!((dominant - 3.9894).abs() < 1e-4);
        assert!((id.rhs - dominant).abs() < 1e-12);
        assert!((id.lhs - dominant).abs() < 1e-10);
        assert!(id.holds());

        let id = kernel_l2_identity(10.0, 1e-14).unwrap();
        assert!((id.lhs - 1.0).abs() < 1e-10 && (id.rhs - 1.0).abs() < 1e-10);
    }

    #[test]
    fn increment_degenerate_case_is_zero() {
        let r = kernel_increment_check(0.1, 0.1, 0.3, 0.3, 0.5, 1e-12).unwrap();
        assert_eq!(r, IncrementRatios { time: 0.0, space: 0.0 });
        assert!(kernel_increment_check(0.1, 0.05, 0.3, 0.3, 0.5, 1e-12).is_err());
        assert!(kernel_increment_check(0.1, 0.2, 0.3, 0.3, 1.5, 1e-12).is_err());
    }

    #[test]
    fn real_line_domination_for_short_times() {
        for &t in &[1e-3, 1e-2, 0.1, 0.5, 0.9] {
            for i in 0..=100 {
                let x = i as f64 / 200.0;
                let r = real_line_domination_ratio(t, x, 1e-14).unwrap();
                assert!(r <= 1.0, "t={t} x={x} ratio={r}");
            }
        }
    }

    #[test]
    fn convolution_examples() {
        let grid = TorusGrid::new(64, 1e-3, 1.0).unwrap();
        let c = vec![2.5; 64];
        let out = convolve_initial(&c, &grid, 0.3).unwrap();
        assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-14));

        let u0 = grid.sample(|x| (2.0 * PI * x).cos());
        let t = 0.02;
        let out = convolve_initial(&u0, &grid, t).unwrap();
        let decay = (-2.0 * PI * PI * t).exp();
        for (o, u) in out.iter().zip(&u0) {
            assert!((o - decay * u).abs() < 1e-14);
        }

        assert_eq!(convolve_initial(&u0, &grid, 0.0).unwrap(), u0);
        assert!(matches!(
            convolve_initial(&u0[..10], &grid, 0.1),
            Err(Error::GridMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn nonnegative_and_reflection_symmetric(t in 1e-4f64..5.0, x in 0.5f64..1.0) {
            let a = heat_kernel_at(t, x, 1e-12).unwrap();
            let b = heat_kernel_at(t, 1.0 - x, 1e-12).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn reflection_for_arbitrary_inputs(t in 1e-4f64..5.0, x in 0.0f64..1.0) {
            let a = heat_kernel_at(t, x, 1e-12).unwrap();
            let b = heat_kernel_at(t, 1.0 - x, 1e-12).unwrap();
            prop_assert!((a - b).abs() <= 1e-13 * a.max(1.0));
        }

        #[test]
        fn truncation_is_sound(t in 1e-4f64..3.0, x in 0.0f64..1.0, e in 6i32..14) {
            let tol = 10f64.powi(-e);
            let q = KernelQuery::new(t, x, tol).unwrap();
            let chosen = heat_kernel(q);
            let refined = if t < FOURIER_SWITCH {
                heat_kernel_images(t, q.x, image_cutoff(t, tol) + 30)
            } else {
                heat_kernel_fourier(t, q.x, fourier_cutoff(t, tol) + 30)
            };
            prop_assert!((chosen - refined).abs() < tol);
        }

        #[test]
        fn mass_is_one(logt in -4.0f64..1.0) {
            let m = kernel_mass(10f64.powf(logt), 1e-13).unwrap();
            prop_assert!((m.value - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn semigroup_composes(s in 0.0f64..0.2, t in 0.0f64..0.2, seed in 0u64..1000) {
            let grid = TorusGrid::new(128, 1e-3, 1.0).unwrap();
            let u0 = grid.sample(|x| {
                1.0 + (2.0 * PI * x * (1 + seed % 7) as f64).sin().abs() + x * x
            });
            let two_steps = convolve_initial(&convolve_initial(&u0, &grid, s).unwrap(), &grid, t).unwrap();
            let one_step = convolve_initial(&u0, &grid, s + t).unwrap();
            for (a, b) in two_steps.iter().zip(&one_step) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let m0 = pairwise_mean(&u0);
            prop_assert!((pairwise_mean(&one_step) - m0).abs() < 1e-13);
        }
    }
}
