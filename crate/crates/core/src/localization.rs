//! Stopping times and localisation.
//!
//! Crossing times are detected on the grid: `τ_ε` is the first stored step
//! whose spatial minimum is `≤ ε`, `τ_M` the first whose maximum is `> M`.
//! Times that are not reached within the horizon are censored and reported
//! as "beyond the horizon" rather than as a number.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coefficients::{regularize_eps, CoefficientSpec, Coefficients, Rescaled};
use crate::error::{invalid, Error, Result};
use crate::grid::TorusGrid;
use crate::solver::{
    restart_from, simulate_with, NoiseStream, PathTrajectory, SimOptions, StopRule,
};

/// A crossing step (absolute), or censored at the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tau {
    At(usize),
    Censored,
}

impl Tau {
    pub fn step(self) -> Option<usize> {
        match self {
            Tau::At(s) => Some(s),
            Tau::Censored => None,
        }
    }

    pub fn time(self, dt: f64) -> Option<f64> {
        self.step().map(|s| s as f64 * dt)
    }

    pub fn is_censored(self) -> bool {
        self == Tau::Censored
    }

    /// True when the crossing happened at or before absolute step `step`.
    pub fn by(self, step: usize) -> bool {
        matches!(self, Tau::At(s) if s <= step)
    }
}

fn first_index(values: &[f64], from: usize, hit: impl Fn(f64) -> bool) -> Option<usize> {
    values.iter().skip(from).position(|&v| hit(v)).map(|i| i + from)
}

/// First step with spatial minimum `≤ eps`.
pub fn scan_tau(trajectory: &PathTrajectory, eps: f64) -> Tau {
    first_index(trajectory.running_min(), 0, |m| m <= eps)
        .map_or(Tau::Censored, |i| Tau::At(trajectory.start_step() + i))
}

/// First step with spatial maximum `> level`.
pub fn scan_exceedance(trajectory: &PathTrajectory, level: f64) -> Tau {
    scan_exceedance_from(trajectory, level, trajectory.start_step())
}

/// First step `≥ from` (absolute) with spatial maximum `> level`.
pub fn scan_exceedance_from(trajectory: &PathTrajectory, level: f64, from: usize) -> Tau {
    let rel = from.saturating_sub(trajectory.start_step());
    first_index(trajectory.running_max(), rel, |m| m > level)
        .map_or(Tau::Censored, |i| Tau::At(trajectory.start_step() + i))
}

/// Crossing data for one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRecord {
    pub dt: f64,
    pub horizon_step: usize,
    /// Decreasing levels.
    pub eps_ladder: Vec<f64>,
    pub tau: Vec<Tau>,
    /// `T_1, T_2, …`; `T_0 = 0` is implicit.
    pub t_k: Vec<Tau>,
    /// End of the glued solution (the finest level's `τ`).
    pub glued_horizon: Tau,
}

impl StoppingRecord {
    pub fn tau_monotone(&self) -> bool {
        self.tau.windows(2).all(|w| w[0] <= w[1])
    }

    /// CSV with columns `epsilon,tau_step,tau_time,censored_flag`. Censored
    /// rows leave the step empty and write the time as `>T_end`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epsilon,tau_step,tau_time,censored_flag")?;
        let horizon = self.horizon_step as f64 * self.dt;
        for (eps, tau) in self.eps_ladder.iter().zip(&self.tau) {
            match tau {
                Tau::At(s) => writeln!(w, "{eps},{s},{},0", *s as f64 * self.dt)?,
                Tau::Censored => writeln!(w, "{eps},,>{horizon},1")?,
            }
        }
        Ok(())
    }
}

/// Result of the `T_k` recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct TkRun {
    pub record: StoppingRecord,
    /// Segment `k−1` covers `[T_{k−1}, T_k]` and uses level `k`.
    pub segments: Vec<PathTrajectory>,
    /// ε used on each segment.
    pub levels: Vec<f64>,
}

/// `ε(k) = base^{−k}`, replaced by the first ladder level below `δ` while
/// `base^{−k} ≥ δ`.
pub fn ladder_level(k: usize, base: f64, delta: f64) -> f64 {
    let first_below = (1..).map(|j| base.powi(-j)).find(|&e| e < delta).unwrap_or(delta / 2.0);
    let e = base.powi(-(k as i32));
    if e < delta {
        e
    } else {
        first_below
    }
}

/// Runs level `k` regularisations on `[T_{k−1}, T_k)` with
/// `T_k = first step > T_{k−1}` whose minimum is `≤ base^{−k}`, restarting
/// from the stored field at each `T_k`. The noise is one stream indexed by
/// absolute step. Stops at the grid horizon or after `T_{k_max}`.
pub fn t_k_recursion(
    spec: &CoefficientSpec,
    u0: &[f64],
    grid: &TorusGrid,
    noise: &NoiseStream,
    k_max: usize,
    base: f64,
    stride: usize,
) -> Result<TkRun> {
    if k_max == 0 {
        return Err(invalid("k_max", "must be >= 1"));
    }
    if !(base > 1.0 && base.is_finite()) {
        return Err(invalid("base", format!("must be > 1, got {base}")));
    }
    let horizon = grid.steps();
    let mut segments: Vec<PathTrajectory> = Vec::new();
    let mut levels = Vec::new();
    let mut t_k = Vec::new();

    for k in 1..=k_max {
        let eps = ladder_level(k, base, spec.delta());
        let coeff = regularize_eps(spec, eps)?;
        let opts = SimOptions {
            stride,
            stop: StopRule::MinAtOrBelow(base.powi(-(k as i32))),
            stop_at_start: false,
            ..SimOptions::default()
        };
        let seg = match segments.last() {
            None => simulate_with(&coeff, u0, grid, noise, opts)?,
            Some(prev) => {
                let last = prev.steps();
                let remaining = horizon - (prev.start_step() + last);
                restart_from(prev, last, &coeff, noise, remaining, opts)?
            }
        };
        let end = seg.start_step() + seg.steps();
        let hit = seg.stopped_early()
            || (end == horizon
                && seg.running_min()[seg.steps()] <= base.powi(-(k as i32))
                && seg.steps() > 0);
        levels.push(eps);
        segments.push(seg);
        if hit {
            t_k.push(Tau::At(end));
            if end == horizon {
                break;
            }
        } else {
            t_k.push(Tau::Censored);
            break;
        }
    }

    let record = StoppingRecord {
        dt: grid.dt(),
        horizon_step: horizon,
        eps_ladder: Vec::new(),
        tau: Vec::new(),
        t_k,
        glued_horizon: Tau::Censored,
    };
    Ok(TkRun {
        record,
        segments,
        levels,
    })
}

/// Probability threshold event for rescaled blocks: oscillation `≥ 1 − 1/e`.
pub const OSCILLATION_THRESHOLD: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// `V = e^k U` on one block, started from `V(0, ·) ≡ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledBlock {
    pub k: usize,
    /// `sup_{s ≤ τ, x} |V(s, x) − 1|`.
    pub oscillation: f64,
    pub trajectory: PathTrajectory,
}

impl RescaledBlock {
    pub fn exceeds_threshold(&self) -> bool {
        self.oscillation >= OSCILLATION_THRESHOLD
    }
}

/// Simulates `∂V = ½ΔV + b_k(V) + σ_k(V)Ẇ` with `b_k(u) = e^k b(e^{−k}u)`
/// (same for `σ`) on the grid horizon from `V ≡ 1`.
pub fn rescaled_oscillation<C: Coefficients>(
    coeff: &C,
    k: usize,
    grid: &TorusGrid,
    noise: &NoiseStream,
) -> Result<RescaledBlock> {
    let rescaled = Rescaled::new(coeff, k as f64);
    let ones = vec![1.0; grid.n()];
    let trajectory = simulate_with(
        &rescaled,
        &ones,
        grid,
        noise,
        SimOptions {
            stride: grid.steps(),
            ..SimOptions::default()
        },
    )?;
    let oscillation = trajectory
        .running_min()
        .iter()
        .zip(trajectory.running_max())
        .map(|(lo, hi)| (hi - 1.0).max(1.0 - lo))
        .fold(0.0, f64::max);
    Ok(RescaledBlock {
        k,
        oscillation,
        trajectory,
    })
}

/// Agreement window between a coarse and a fine ε-level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluePair {
    pub coarse: f64,
    pub fine: f64,
    /// Steps `< agree_until` were compared and are bit-identical;
    /// censored means the whole horizon.
    pub agree_until: Tau,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueCertificate {
    pub pairs: Vec<GluePair>,
    pub tau: Vec<Tau>,
    pub glued_horizon: Tau,
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn certify(coarse_eps: f64, coarse: &PathTrajectory, fine_eps: f64, fine: &PathTrajectory) -> Result<GluePair> {
    let agree_until = scan_tau(coarse, coarse_eps);
    let limit = match agree_until {
        Tau::At(s) => s - coarse.start_step(),
        Tau::Censored => coarse.steps() + 1,
    }
    .min(fine.steps() + 1)
    .min(coarse.steps() + 1);
    let violation = |i: usize| Error::GlueViolation {
        coarse: coarse_eps,
        fine: fine_eps,
        step: coarse.start_step() + i,
    };
    let (a, b) = (coarse.stats(), fine.stats());
    for i in 0..limit {
        if a.min[i].to_bits() != b.min[i].to_bits()
            || a.max[i].to_bits() != b.max[i].to_bits()
            || a.mean[i].to_bits() != b.mean[i].to_bits()
            || a.variance[i].to_bits() != b.variance[i].to_bits()
        {
            return Err(violation(i));
        }
    }
    for (i, field) in coarse.snapshots() {
        if i >= limit {
            break;
        }
        match fine.snapshot(i) {
            Some(other) if same_bits(field, other) => {}
            Some(_) => return Err(violation(i)),
            None => {}
        }
    }
    Ok(GluePair {
        coarse: coarse_eps,
        fine: fine_eps,
        agree_until,
    })
}

/// Certifies that trajectories at successive ε-levels driven by the same
/// noise agree bit for bit before the coarser level's `τ_ε`. Levels must be
/// given in decreasing ε. The first and last levels are also compared
/// directly.
pub fn glue(levels: &[(f64, &PathTrajectory)]) -> Result<GlueCertificate> {
    if levels.is_empty() {
        return Err(invalid("levels", "need at least one level"));
    }
    if levels.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(invalid("levels", "must be strictly decreasing in eps"));
    }
    let (_, first) = levels[0];
    for (_, t) in levels {
        if t.stream() != first.stream() || t.grid() != first.grid() || t.start_step() != first.start_step() {
            return Err(Error::Precondition(
                "glue needs one grid, start step and noise stream across levels".into(),
            ));
        }
    }
    let mut pairs = Vec::new();
    for w in levels.windows(2) {
        pairs.push(certify(w[0].0, w[0].1, w[1].0, w[1].1)?);
    }
    if levels.len() > 2 {
        let (ce, ct) = levels[0];
        let (fe, ft) = levels[levels.len() - 1];
        pairs.push(certify(ce, ct, fe, ft)?);
    }
    let tau: Vec<Tau> = levels.iter().map(|(e, t)| scan_tau(t, *e)).collect();
    let glued_horizon = *tau.last().expect("non-empty");
    Ok(GlueCertificate {
        pairs,
        tau,
        glued_horizon,
    })
}

impl GlueCertificate {
    pub fn record(&self, eps_ladder: &[f64], grid: &TorusGrid) -> StoppingRecord {
        StoppingRecord {
            dt: grid.dt(),
            horizon_step: grid.steps(),
            eps_ladder: eps_ladder.to_vec(),
            tau: self.tau.clone(),
            t_k: Vec::new(),
            glued_horizon: self.glued_horizon,
        }
    }
}

/// `τ_M` for each level of an increasing M-ladder on one path.
#[derive(Clone, Debug, PartialEq)]
pub struct SupLadder {
    pub levels: Vec<f64>,
    pub tau: Vec<Tau>,
    pub trajectory: PathTrajectory,
    /// Set when the scheme produced non-finite values; every level not yet
    /// crossed is then counted as crossed at that step.
    pub blowup_step: Option<usize>,
}

/// Simulates until the largest level is exceeded (or the horizon) and
/// reads off `τ_M` for every level.
pub fn sup_ladder_m<C: Coefficients>(
    coeff: &C,
    u0: &[f64],
    grid: &TorusGrid,
    noise: &NoiseStream,
    levels: &[f64],
    stride: usize,
) -> Result<SupLadder> {
    if levels.is_empty() || levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("levels", "must be non-empty and strictly increasing"));
    }
    let top = levels[levels.len() - 1];
    let opts = SimOptions {
        stride,
        stop: StopRule::MaxAbove(top),
        ..SimOptions::default()
    };
    match simulate_with(coeff, u0, grid, noise, opts) {
        Ok(trajectory) => {
            let tau = levels.iter().map(|&m| scan_exceedance(&trajectory, m)).collect();
            Ok(SupLadder {
                levels: levels.to_vec(),
                tau,
                trajectory,
                blowup_step: None,
            })
        }
        Err(Error::Blowup { step }) => {
            // rerun up to the last finite step to recover the extrema
            let finite = grid.with_steps(step.saturating_sub(1).max(1))?;
            let trajectory = simulate_with(coeff, u0, &finite, noise, opts)?;
            let tau = levels
                .iter()
                .map(|&m| match scan_exceedance(&trajectory, m) {
                    Tau::Censored => Tau::At(step),
                    t => t,
                })
                .collect();
            Ok(SupLadder {
                levels: levels.to_vec(),
                tau,
                trajectory,
                blowup_step: Some(step),
            })
        }
        Err(e) => Err(e),
    }
}
