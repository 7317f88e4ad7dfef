//! Ensemble statistics. Ensembles are slices of trajectories indexed by
//! replica; every reduction runs in replica order with pairwise sums, so
//! results do not depend on how the ensemble was produced.

use serde::{Deserialize, Serialize};

use super::stats::{bootstrap, wilson, Interval, DEFAULT_RESAMPLES};
use super::{Table, VerificationReport};
use crate::error::{invalid, Error, Result};
use crate::localization::Tau;
use crate::numerics::pairwise_mean;
use crate::solver::PathTrajectory;

/// Smallest ensemble accepted by the moment estimators.
pub const MIN_MOMENT_REPLICAS: usize = 30;

/// Smallest offsets, in cells or steps, accepted by the increment
/// estimator; below this the discretisation dominates.
pub const MIN_OFFSET: usize = 4;

fn check_ensemble(ensemble: &[PathTrajectory], needed: usize) -> Result<()> {
    if ensemble.len() < needed {
        return Err(Error::InsufficientReplicas {
            needed,
            got: ensemble.len(),
        });
    }
    let first = &ensemble[0];
    if ensemble
        .iter()
        .any(|t| t.grid() != first.grid() || t.start_step() != first.start_step())
    {
        return Err(Error::Precondition("ensemble members differ in grid or start step".into()));
    }
    Ok(())
}

/// Absolute step nearest to time `t`, which must be a grid time.
pub fn step_of(trajectory: &PathTrajectory, t: f64) -> Result<usize> {
    let dt = trajectory.grid().dt();
    let s = (t / dt).round();
    if !(s >= 0.0) || (s * dt - t).abs() > 1e-9 * dt.max(t.abs()) {
        return Err(invalid("t", format!("{t} is not a multiple of dt = {dt}")));
    }
    Ok(s as usize)
}

/// Stored field at absolute step `step`.
pub fn field_at(trajectory: &PathTrajectory, step: usize) -> Result<&[f64]> {
    step.checked_sub(trajectory.start_step())
        .and_then(|i| trajectory.snapshot(i))
        .ok_or(Error::NotSnapshotted {
            step,
            stride: trajectory.stride(),
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub t: f64,
    pub estimate: f64,
    pub standard_error: f64,
    pub interval: Interval,
    pub replicas: usize,
}

/// `|u|^p` per replica (rows) and node (columns) at time `t`.
fn powered_fields(ensemble: &[PathTrajectory], p: f64, t: f64) -> Result<Vec<Vec<f64>>> {
    let step = step_of(&ensemble[0], t)?;
    ensemble
        .iter()
        .map(|traj| Ok(field_at(traj, step)?.iter().map(|u| u.abs().powf(p)).collect()))
        .collect()
}

fn node_means(rows: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let n = rows[0].len();
    let mut column = vec![0.0; idx.len()];
    (0..n)
        .map(|j| {
            for (slot, &i) in column.iter_mut().zip(idx) {
                *slot = rows[i][j];
            }
            pairwise_mean(&column)
        })
        .collect()
}

fn moment_estimate<F>(ensemble: &[PathTrajectory], p: f64, t: f64, seed: u64, reduce: F) -> Result<MomentEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    check_ensemble(ensemble, MIN_MOMENT_REPLICAS)?;
    if !(p > 0.0) {
        return Err(invalid("p", format!("must be > 0, got {p}")));
    }
    let rows = powered_fields(ensemble, p, t)?;
    let b = bootstrap(rows.len(), DEFAULT_RESAMPLES, seed, |idx| reduce(&node_means(&rows, idx)))?;
    Ok(MomentEstimate {
        p,
        t,
        estimate: b.estimate,
        standard_error: b.standard_error,
        interval: b.interval,
        replicas: rows.len(),
    })
}

/// `max_x` of the empirical `E|u(t,x)|^p`, with a percentile bootstrap
/// over replicas.
pub fn estimate_sup_moment(ensemble: &[PathTrajectory], p: f64, t: f64, seed: u64) -> Result<MomentEstimate> {
    moment_estimate(ensemble, p, t, seed, |m| m.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Spatial average of the empirical `E|u(t,x)|^p`; the natural estimator
/// when the law of `u(t,x)` does not depend on `x`.
pub fn estimate_mean_moment(ensemble: &[PathTrajectory], p: f64, t: f64, seed: u64) -> Result<MomentEstimate> {
    moment_estimate(ensemble, p, t, seed, pairwise_mean)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Offset {
    Space { cells: usize },
    Time { steps: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderRow {
    pub offset: Offset,
    /// `|x − x'|` or `t' − t`.
    pub physical: f64,
    /// `max_x (E|Δu|^p)^{1/p}`.
    pub norm: f64,
    /// `norm / |x − x'|^β` or `norm / (t' − t)^{β/2}`.
    pub quotient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub p: f64,
    pub beta: f64,
    pub t: f64,
    pub rows: Vec<HolderRow>,
}

impl HolderEstimate {
    pub fn max_quotient(&self) -> f64 {
        self.rows.iter().map(|r| r.quotient).fold(0.0, f64::max)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("holder_quotients", &["is_time", "offset", "norm", "quotient", "beta", "p", "t"]);
        for r in &self.rows {
            let is_time = matches!(r.offset, Offset::Time { .. }) as u8 as f64;
            t.push(vec![is_time, r.physical, r.norm, r.quotient, self.beta, self.p, self.t]);
        }
        t
    }
}

/// Empirical increment norms at time `t` (space offsets) and between `t`
/// and `t + gap` (time offsets).
pub fn estimate_holder_quotient(
    ensemble: &[PathTrajectory],
    p: f64,
    beta: f64,
    t: f64,
    offsets: &[Offset],
) -> Result<HolderEstimate> {
    check_ensemble(ensemble, 2)?;
    if !(p >= 1.0) || !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("p/beta", format!("need p >= 1 and beta in (0, 1), got {p}, {beta}")));
    }
    let grid = *ensemble[0].grid();
    let step = step_of(&ensemble[0], t)?;
    let mut rows = Vec::with_capacity(offsets.len());
    for &offset in offsets {
        let (count, physical) = match offset {
            Offset::Space { cells } => (cells, cells as f64 * grid.dx()),
            Offset::Time { steps } => (steps, steps as f64 * grid.dt()),
        };
        if count < MIN_OFFSET {
            return Err(invalid(
                "offset",
                format!("{offset:?} is below the resolution floor of {MIN_OFFSET} cells/steps"),
            ));
        }
        if let Offset::Space { cells } = offset {
            if cells > grid.n() / 2 {
                return Err(invalid("offset", format!("{cells} cells exceeds half the torus")));
            }
        }
        let increments: Vec<Vec<f64>> = ensemble
            .iter()
            .map(|traj| -> Result<Vec<f64>> {
                let u = field_at(traj, step)?;
                Ok(match offset {
                    Offset::Space { cells } => {
                        let n = u.len();
                        (0..n).map(|j| (u[(j + cells) % n] - u[j]).abs().powf(p)).collect()
                    }
                    Offset::Time { steps } => {
                        let v = field_at(traj, step + steps)?;
                        u.iter().zip(v).map(|(a, b)| (b - a).abs().powf(p)).collect()
                    }
                })
            })
            .collect::<Result<_>>()?;
        let all: Vec<usize> = (0..increments.len()).collect();
        let norm = node_means(&increments, &all)
            .into_iter()
            .fold(0.0, f64::max)
            .powf(1.0 / p);
        let scale = match offset {
            Offset::Space { .. } => physical.powf(beta),
            Offset::Time { .. } => physical.powf(beta / 2.0),
        };
        rows.push(HolderRow {
            offset,
            physical,
            norm,
            quotient: norm / scale,
        });
    }
    Ok(HolderEstimate { p, beta, t, rows })
}

/// `max (u1 − u2)` over the snapshots both trajectories store.
pub fn max_order_violation(lower: &PathTrajectory, upper: &PathTrajectory) -> Result<f64> {
    if lower.grid() != upper.grid() || lower.start_step() != upper.start_step() {
        return Err(Error::Precondition("pair members differ in grid or start step".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    for (i, u1) in lower.snapshots() {
        if let Some(u2) = upper.snapshot(i) {
            for (a, b) in u1.iter().zip(u2) {
                worst = worst.max(a - b);
            }
        }
    }
    Ok(worst)
}

/// Passes iff every pair stays ordered within `tol` at every stored
/// snapshot.
pub fn comparison_check(pairs: &[(PathTrajectory, PathTrajectory)], tol: f64) -> Result<VerificationReport> {
    if pairs.is_empty() {
        return Err(Error::InsufficientReplicas { needed: 1, got: 0 });
    }
    let mut table = Table::new("comparison_violation", &["replica", "max_violation"]);
    let mut worst = f64::NEG_INFINITY;
    let mut failing = 0usize;
    for (r, (a, b)) in pairs.iter().enumerate() {
        let v = max_order_violation(a, b)?;
        table.push(vec![r as f64, v]);
        worst = worst.max(v);
        failing += (v > tol) as usize;
    }
    Ok(VerificationReport::new(
        "comparison.order",
        "max over pairs and stored snapshots of u1 - u2 under common noise",
        worst,
        failing == 0,
    )
    .with_bound(tol)
    .with_tolerance(tol)
    .with_replicas(pairs.len())
    .note(format!("{failing} of {} pairs exceed the tolerance", pairs.len()))
    .table(table))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub level: f64,
    pub crossings: usize,
    pub replicas: usize,
    pub p_hat: f64,
    pub interval: Interval,
}

/// Fraction of replicas with `τ ≤ horizon_step` at each level, with Wilson
/// intervals. `taus[r][i]` is replica `r` at level `i`.
pub fn crossing_fractions(taus: &[Vec<Tau>], levels: &[f64], horizon_step: usize) -> Result<Vec<LadderRow>> {
    if taus.is_empty() {
        return Err(Error::InsufficientReplicas { needed: 1, got: 0 });
    }
    if taus.iter().any(|t| t.len() != levels.len()) {
        return Err(invalid("taus", "every replica needs one entry per level"));
    }
    levels
        .iter()
        .enumerate()
        .map(|(i, &level)| {
            let crossings = taus.iter().filter(|t| t[i].by(horizon_step)).count();
            Ok(LadderRow {
                level,
                crossings,
                replicas: taus.len(),
                p_hat: crossings as f64 / taus.len() as f64,
                interval: wilson(crossings, taus.len())?,
            })
        })
        .collect()
}

/// Non-increasing along the ladder, where a rise is excused when the two
/// Wilson intervals overlap.
fn ci_monotone(rows: &[LadderRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].p_hat <= w[0].p_hat || w[1].interval.overlaps(&w[0].interval))
}

fn ladder_table(figure: &str, level_name: &str, rows: &[LadderRow], t_end: f64) -> Table {
    let mut t = Table::new(figure, &[level_name, "p_hat", "ci_lo", "ci_hi", "T", "replicas"]);
    for r in rows {
        t.push(vec![r.level, r.p_hat, r.interval.lo, r.interval.hi, t_end, r.replicas as f64]);
    }
    t
}

/// Estimates `P{τ_ε ≤ T}` along a decreasing ε-ladder. Passes iff the
/// estimates are non-increasing (CI-adjusted) and the finest one is at most
/// `threshold`.
pub fn positivity_ladder(
    taus: &[Vec<Tau>],
    eps_ladder: &[f64],
    horizon_step: usize,
    dt: f64,
    threshold: f64,
) -> Result<VerificationReport> {
    if eps_ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("eps_ladder", "must be strictly decreasing"));
    }
    let rows = crossing_fractions(taus, eps_ladder, horizon_step)?;
    let monotone = ci_monotone(&rows);
    let finest = rows.last().expect("non-empty ladder");
    let t_end = horizon_step as f64 * dt;
    Ok(VerificationReport::new(
        "positivity.ladder",
        "P{tau_eps <= T} non-increasing along the eps ladder",
        finest.p_hat,
        monotone && finest.p_hat <= threshold,
    )
    .with_interval(finest.interval)
    .with_bound(threshold)
    .with_replicas(taus.len())
    .note(format!("monotone (CI-adjusted): {monotone}"))
    .table(ladder_table("exceedance_vs_eps", "epsilon", &rows, t_end)))
}

/// Superlinear ladder: `P{τ_M ≤ T}` along an increasing M-ladder, each
/// compared with the Chebyshev bound `E[S^p] / M^p` where `S` is the path
/// supremum of `|u|` up to the stop.
pub fn superlinear_ladder(
    taus: &[Vec<Tau>],
    m_ladder: &[f64],
    path_sups: &[f64],
    p: f64,
    horizon_step: usize,
    dt: f64,
) -> Result<VerificationReport> {
    if m_ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("m_ladder", "must be strictly increasing"));
    }
    if path_sups.len() != taus.len() {
        return Err(invalid("path_sups", "one supremum per replica"));
    }
    let rows = crossing_fractions(taus, m_ladder, horizon_step)?;
    let moment = pairwise_mean(&path_sups.iter().map(|s| s.abs().powf(p)).collect::<Vec<_>>());
    let monotone = rows.windows(2).all(|w| w[1].p_hat <= w[0].p_hat);
    let mut table = ladder_table("exceedance_vs_m", "M", &rows, horizon_step as f64 * dt);
    table.columns.push("chebyshev_bound".into());
    let mut within = true;
    for (row, r) in table.rows.iter_mut().zip(&rows) {
        let bound = moment / r.level.powf(p);
        within &= r.p_hat <= bound;
        row.push(bound);
    }
    let first = rows[0];
    Ok(VerificationReport::new(
        "superlinear.ladder",
        "P{tau_M <= T} non-increasing in M and below the Chebyshev bound",
        first.p_hat,
        monotone && within,
    )
    .with_interval(first.interval)
    .with_bound(moment / first.level.powf(p))
    .with_replicas(taus.len())
    .note(format!("monotone: {monotone}; within Chebyshev bounds: {within}; E[S^{p}] = {moment:e}"))
    .table(table))
}

/// Limit consistency along an α-ladder (increasing α) under shared noise.
/// `runs[r][i]` is replica `r` at ladder member `i`. For a drift of sign
/// `theta` the trajectories must move monotonically in α in the direction
/// of `theta`, the sup-gaps between successive members must shrink
/// strictly, and the `p`-th sup moments at `t` must stay within
/// `moment_spread` of each other (relative).
#[allow(clippy::too_many_arguments)]
pub fn limit_consistency_alpha(
    runs: &[Vec<PathTrajectory>],
    alphas: &[f64],
    theta: f64,
    tol: f64,
    p: f64,
    t: f64,
    moment_spread: f64,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    if alphas.len() < 2 || alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("alphas", "need at least two strictly increasing values"));
    }
    if runs.iter().any(|r| r.len() != alphas.len()) {
        return Err(invalid("runs", "every replica needs one trajectory per ladder member"));
    }
    let k = alphas.len();
    let mut worst_order = f64::NEG_INFINITY;
    let mut gaps = vec![0.0f64; k - 1];
    for replica in runs {
        for i in 0..k - 1 {
            let (a, b) = (&replica[i], &replica[i + 1]);
            // larger α moves in the direction of theta
            let v = if theta < 0.0 {
                max_order_violation(b, a)?
            } else {
                max_order_violation(a, b)?
            };
            worst_order = worst_order.max(v);
            for (j, u) in a.snapshots() {
                if let Some(w) = b.snapshot(j) {
                    for (x, y) in u.iter().zip(w) {
                        gaps[i] = gaps[i].max((x - y).abs());
                    }
                }
            }
        }
    }
    let n = runs.len();
    let order = VerificationReport::new(
        "critical.order",
        "trajectories monotone in alpha at every stored snapshot",
        worst_order,
        worst_order <= tol,
    )
    .with_bound(tol)
    .with_tolerance(tol)
    .with_replicas(n);

    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
    let mut gap_table = Table::new("alpha_sup_gaps", &["alpha_lo", "alpha_hi", "sup_gap"]);
    for i in 0..k - 1 {
        gap_table.push(vec![alphas[i], alphas[i + 1], gaps[i]]);
    }
    let gap_report = VerificationReport::new(
        "critical.cauchy",
        "sup-gaps between successive alpha members strictly decreasing",
        *gaps.last().expect("k >= 2"),
        shrinking,
    )
    .with_replicas(n)
    .table(gap_table);

    let mut moments = Vec::with_capacity(k);
    for i in 0..k {
        let member: Vec<PathTrajectory> = runs.iter().map(|r| r[i].clone()).collect();
        moments.push(estimate_sup_moment(&member, p, t, seed.wrapping_add(i as u64))?);
    }
    let lo = moments.iter().map(|m| m.estimate).fold(f64::INFINITY, f64::min);
    let hi = moments.iter().map(|m| m.estimate).fold(f64::NEG_INFINITY, f64::max);
    let spread = hi / lo - 1.0;
    let mut mt = Table::new("alpha_moments", &["alpha", "p", "estimate", "ci_lo", "ci_hi"]);
    for (a, m) in alphas.iter().zip(&moments) {
        mt.push(vec![*a, p, m.estimate, m.interval.lo, m.interval.hi]);
    }
    let moment_report = VerificationReport::new(
        "critical.moments",
        "sup p-th moments finite and uniform across the alpha ladder",
        hi,
        hi.is_finite() && spread <= moment_spread,
    )
    .with_tolerance(moment_spread)
    .with_replicas(n)
    .note(format!("relative spread max/min - 1 = {spread:e}"))
    .table(mt);

    Ok(vec![order, gap_report, moment_report])
}
