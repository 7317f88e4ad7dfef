use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{geometric_grid, uniform_grid};

/// Certified constants of one coefficient.
///
/// Infinite entries are exact: they appear when the function blows up at
/// zero (`growth`) or has an unbounded superlinear tail (`lipschitz`,
/// `growth`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    /// Lipschitz constant on the scanned domain.
    pub lipschitz: f64,
    /// `sup_{[0, δ]} |f|`.
    pub sup_near_zero: f64,
    /// `sup_{z > 0} |f(z) − f(0)| / z`.
    pub growth: f64,
}

const START_POINTS: usize = 257;
const MAX_POINTS: usize = (1 << 20) + 1;
const REL_STABILITY: f64 = 0.01;

pub(crate) struct ScanPlan<'a> {
    pub value: &'a dyn Fn(f64) -> f64,
    pub envelope: &'a dyn Fn(f64) -> f64,
    pub delta: f64,
    /// Left end of the Lipschitz domain.
    pub lip_lo: f64,
    /// Known contribution from left of `lip_lo`.
    pub lip_floor: f64,
    /// Beyond `hi` the derivative is constant and equal to `tail_slope`.
    pub hi: f64,
    pub tail_slope: f64,
    pub unbounded_tail: bool,
    /// Below `growth_lo` the quotient `|f(z) − f(0)|/z` is at most `growth_floor`
    /// or has the limit it takes at `growth_lo`.
    pub growth_lo: f64,
    pub growth_floor: f64,
    pub blows_up_at_zero: bool,
}

fn scan_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let mut pts = uniform_grid(lo, hi, n);
    if lo > 0.0 {
        pts.extend(geometric_grid(lo, hi, n));
    }
    pts
}

/// Maximises `g` over refining grids until two successive estimates agree
/// to one percent.
fn refine_sup(what: &str, lo: f64, hi: f64, g: &dyn Fn(f64) -> f64) -> Result<f64> {
    let eval = |n: usize| -> f64 {
        scan_points(lo, hi, n)
            .into_iter()
            .map(g)
            .fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
    };
    let mut n = START_POINTS;
    let mut prev = eval(n);
    loop {
        if prev.is_nan() {
            return Err(Error::Estimation(format!("{what}: NaN while scanning [{lo:e}, {hi:e}]")));
        }
        let next_n = 2 * n - 1;
        let next = eval(next_n);
        if next.is_infinite() && prev.is_infinite() {
            return Ok(next);
        }
        if (next - prev).abs() <= REL_STABILITY * next.abs() {
            return Ok(next.max(prev));
        }
        if next_n >= MAX_POINTS {
            return Err(Error::Estimation(format!(
                "{what}: no 1% agreement on [{lo:e}, {hi:e}] after {next_n} points \
                 (last estimates {prev:e}, {next:e})"
            )));
        }
        prev = next;
        n = next_n;
    }
}

pub(crate) fn estimate(plan: &ScanPlan<'_>) -> Result<GrowthConstants> {
    let lipschitz = if plan.unbounded_tail {
        f64::INFINITY
    } else {
        let hi = plan.hi.max(plan.lip_lo);
        refine_sup("Lipschitz constant", plan.lip_lo, hi, plan.envelope)?
            .max(plan.lip_floor)
            .max(plan.tail_slope)
    };

    let value = plan.value;
    let sup_near_zero = refine_sup("sup near zero", 0.0, plan.delta, &|z| value(z).abs())?
        .max(refine_sup("sup near zero", 1e-300, plan.delta, &|z| value(z).abs())?);

    let growth = if plan.blows_up_at_zero || plan.unbounded_tail {
        f64::INFINITY
    } else {
        let f0 = value(0.0);
        let hi = plan.hi.max(plan.growth_lo);
        refine_sup("growth constant", plan.growth_lo, hi, &|z| (value(z) - f0).abs() / z)?
            .max(plan.growth_floor)
            .max(plan.tail_slope)
    };

    Ok(GrowthConstants {
        lipschitz,
        sup_near_zero,
        growth,
    })
}

/// `sup_{0 ≤ z ≤ z_max} |f_n(z) − f(z)|` over refining grids, geometric
/// from `1e-40` and uniform from zero.
pub fn uniform_gap(
    f_n: &dyn Fn(f64) -> f64,
    f: &dyn Fn(f64) -> f64,
    z_max: f64,
) -> Result<f64> {
    if !(z_max > 0.0 && z_max.is_finite()) {
        return Err(crate::error::invalid("z_max", format!("must be finite and > 0, got {z_max}")));
    }
    let gap = |z: f64| (f_n(z) - f(z)).abs();
    let a = refine_sup("uniform gap", 1e-40, z_max, &gap)?;
    Ok(a.max(gap(0.0)))
}
