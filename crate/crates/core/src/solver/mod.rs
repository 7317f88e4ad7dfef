//! Semi-implicit Euler–Maruyama scheme on the periodic grid.
//!
//! One step is
//!
//! ```text
//! u^{m+1} = (I − (Δt/2) L_h)^{-1} [u^m + Δt b(u^m) + σ(u^m) ΔW^m / Δx]
//! ```
//!
//! with `L_h` the periodic second difference and `ΔW^m_j = ξ √(Δt Δx)`.
//! The implicit solve is diagonal in the discrete Fourier basis: mode `k`
//! is multiplied by `1 / (1 + Δt (2/Δx²) sin²(πk/n))`.

mod noise;
mod trajectory;

pub use noise::NoiseStream;
pub use trajectory::{read_binary, PathTrajectory, SnapshotFile, StepStats};

use crate::coefficients::Coefficients;
use crate::error::{invalid, Error, Result};
use crate::grid::TorusGrid;
use crate::numerics::{geometric_grid, uniform_grid};
use crate::spectral::{second_difference_symbol, CirculantOperator};

/// Fourier multipliers of `(I − (Δt/2) L_h)^{-1}`.
pub fn implicit_symbol(grid: &TorusGrid) -> Vec<f64> {
    second_difference_symbol(grid.n())
        .into_iter()
        .map(|l| 1.0 / (1.0 - 0.5 * grid.dt() * l))
        .collect()
}

/// Exact variance of the scheme's solution at every node after `steps`
/// steps with `b = 0`, `σ ≡ 1`, `u0 ≡ 0`: `Δt Σ_k Σ_{r=1}^{steps} λ_k^{2r}`
/// with `λ_k` the implicit multipliers.
pub fn additive_noise_variance(grid: &TorusGrid, steps: usize) -> f64 {
    let terms: Vec<f64> = implicit_symbol(grid)
        .into_iter()
        .map(|l| {
            let q = l * l;
            if q == 1.0 {
                steps as f64
            } else {
                q * (1.0 - q.powi(steps as i32)) / (1.0 - q)
            }
        })
        .collect();
    grid.dt() * crate::numerics::pairwise_sum(&terms)
}

/// Reusable workspace for advancing one field.
pub struct Stepper {
    grid: TorusGrid,
    solve: CirculantOperator,
    noise_scale: f64,
    xi: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &TorusGrid) -> Self {
        Self {
            grid: *grid,
            solve: CirculantOperator::new(implicit_symbol(grid)),
            noise_scale: (grid.dt() / grid.dx()).sqrt(),
            xi: vec![0.0; grid.n()],
        }
    }

    /// Advances `field` from absolute step `step` to `step + 1`.
    pub fn advance<C: Coefficients + ?Sized>(
        &mut self,
        coeff: &C,
        noise: &NoiseStream,
        step: usize,
        field: &mut [f64],
    ) {
        noise.step_normals(step, &mut self.xi);
        let dt = self.grid.dt();
        for (u, xi) in field.iter_mut().zip(&self.xi) {
            let z = *u;
            *u = z + dt * coeff.drift(z) + coeff.diffusion(z) * self.noise_scale * xi;
        }
        self.solve.apply(field);
    }
}

/// Optional early termination, checked after every step (and at the start).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum StopRule {
    #[default]
    None,
    /// Stop once the spatial minimum is `≤ level`.
    MinAtOrBelow(f64),
    /// Stop once the spatial maximum is `> level`.
    MaxAbove(f64),
}

impl StopRule {
    fn triggered(&self, min: f64, max: f64) -> bool {
        match *self {
            StopRule::None => false,
            StopRule::MinAtOrBelow(level) => min <= level,
            StopRule::MaxAbove(level) => max > level,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    /// Keep a full field every `stride` steps (and at the last step).
    pub stride: usize,
    /// Absolute index of the first step; selects the noise used.
    pub start_step: usize,
    pub stop: StopRule,
    /// Apply the stop rule to the initial field as well.
    pub stop_at_start: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            start_step: 0,
            stop: StopRule::None,
            stop_at_start: true,
        }
    }
}

/// Runs the scheme over the grid horizon with snapshots every `stride`
/// steps. `u0` must be non-negative.
pub fn simulate<C: Coefficients + ?Sized>(
    coeff: &C,
    u0: &[f64],
    grid: &TorusGrid,
    noise: &NoiseStream,
    stride: usize,
) -> Result<PathTrajectory> {
    simulate_with(
        coeff,
        u0,
        grid,
        noise,
        SimOptions {
            stride,
            ..SimOptions::default()
        },
    )
}

pub fn simulate_with<C: Coefficients + ?Sized>(
    coeff: &C,
    u0: &[f64],
    grid: &TorusGrid,
    noise: &NoiseStream,
    opts: SimOptions,
) -> Result<PathTrajectory> {
    if let Some((j, v)) = u0.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::Precondition(format!(
            "initial field must be non-negative and finite, u0[{j}] = {v}"
        )));
    }
    run(coeff, u0, grid, noise, opts)
}

fn run<C: Coefficients + ?Sized>(
    coeff: &C,
    u0: &[f64],
    grid: &TorusGrid,
    noise: &NoiseStream,
    opts: SimOptions,
) -> Result<PathTrajectory> {
    if u0.len() != grid.n() {
        return Err(Error::GridMismatch {
            expected: grid.n(),
            got: u0.len(),
        });
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Blowup {
            step: opts.start_step,
        });
    }
    if opts.stride == 0 {
        return Err(invalid("snapshot_stride", "must be >= 1"));
    }
    let steps = grid.steps();
    let mut stats = StepStats::with_capacity(steps + 1);
    let mut snapshot_steps = vec![0];
    let mut snapshots = vec![u0.to_vec()];
    let mut field = u0.to_vec();
    let mut stepper = Stepper::new(grid);
    stats.push(&field);
    let mut stopped_early = opts.stop_at_start && opts.stop.triggered(stats.min[0], stats.max[0]);

    let mut done = 0;
    while done < steps && !stopped_early {
        stepper.advance(coeff, noise, opts.start_step + done, &mut field);
        done += 1;
        if field.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup {
                step: opts.start_step + done,
            });
        }
        stats.push(&field);
        stopped_early = opts.stop.triggered(stats.min[done], stats.max[done]) && done < steps;
        if done % opts.stride == 0 || done == steps || stopped_early {
            snapshot_steps.push(done);
            snapshots.push(field.clone());
        }
    }

    Ok(PathTrajectory {
        grid: *grid,
        stream: *noise,
        start_step: opts.start_step,
        stride: opts.stride,
        snapshot_steps,
        snapshots,
        stats,
        stopped_early,
    })
}

/// Points on which coefficient order is checked for pair runs.
const ORDER_CHECK_POINTS: usize = 2048;

/// Runs both pairs with identical noise after checking `b1 ≤ b2` and
/// `σ1 = σ2` on `[0, range]` and `u0_1 ≤ u0_2`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pair_common_noise<C1, C2>(
    coeff1: &C1,
    coeff2: &C2,
    u0_1: &[f64],
    u0_2: &[f64],
    grid: &TorusGrid,
    noise: &NoiseStream,
    stride: usize,
    range: f64,
) -> Result<(PathTrajectory, PathTrajectory)>
where
    C1: Coefficients + ?Sized,
    C2: Coefficients + ?Sized,
{
    if !(range > 0.0 && range.is_finite()) {
        return Err(invalid("range", format!("must be finite and > 0, got {range}")));
    }
    let mut zs = uniform_grid(0.0, range, ORDER_CHECK_POINTS);
    zs.extend(geometric_grid(1e-300, range, ORDER_CHECK_POINTS));
    for z in zs {
        let (b1, b2) = (coeff1.drift(z), coeff2.drift(z));
        if !(b1 <= b2) {
            return Err(Error::Precondition(format!(
                "drift order violated at z = {z:e}: b1 = {b1:e} > b2 = {b2:e}"
            )));
        }
        let (s1, s2) = (coeff1.diffusion(z), coeff2.diffusion(z));
        if s1 != s2 {
            return Err(Error::Precondition(format!(
                "diffusions differ at z = {z:e}: {s1:e} vs {s2:e}"
            )));
        }
    }
    if u0_1.len() != u0_2.len() {
        return Err(Error::GridMismatch {
            expected: u0_1.len(),
            got: u0_2.len(),
        });
    }
    if let Some(j) = (0..u0_1.len()).find(|&j| !(u0_1[j] <= u0_2[j])) {
        return Err(Error::Precondition(format!(
            "initial data not ordered at node {j}: {} > {}",
            u0_1[j], u0_2[j]
        )));
    }
    let first = simulate(coeff1, u0_1, grid, noise, stride)?;
    let second = simulate(coeff2, u0_2, grid, noise, stride)?;
    Ok((first, second))
}

/// Continues from the stored snapshot at relative index `index` for `steps`
/// more steps, driven by `noise` from absolute step
/// `trajectory.start_step() + index` on.
pub fn restart_from<C: Coefficients + ?Sized>(
    trajectory: &PathTrajectory,
    index: usize,
    coeff: &C,
    noise: &NoiseStream,
    steps: usize,
    opts: SimOptions,
) -> Result<PathTrajectory> {
    let field = trajectory.snapshot(index).ok_or(Error::NotSnapshotted {
        step: index,
        stride: trajectory.stride(),
    })?;
    let grid = trajectory.grid().with_steps(steps)?;
    run(
        coeff,
        field,
        &grid,
        noise,
        SimOptions {
            start_step: trajectory.start_step() + index,
            ..opts
        },
    )
}

#[cfg(test)]
mod tests;
