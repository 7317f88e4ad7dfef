use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

/// Uniform periodic discretisation of `[0, 1)` together with a time step
/// and a horizon.
///
/// `n` is a power of two (at least 8), `Δt ≤ Δx` and `T_end / Δt` is an
/// integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    dt: f64,
    steps: usize,
}

impl TorusGrid {
    pub fn new(n: usize, dt: f64, t_end: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(invalid("n", format!("must be a power of two >= 8, got {n}")));
        }
        require_positive("dt", dt)?;
        require_positive("t_end", t_end)?;
        let dx = 1.0 / n as f64;
        if dt > dx {
            return Err(invalid(
                "dt",
                format!("accuracy guard requires dt <= dx = {dx:e}, got {dt:e}"),
            ));
        }
        let ratio = t_end / dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid(
                "t_end",
                format!("t_end / dt must be an integer, got {ratio}"),
            ));
        }
        Ok(Self {
            n,
            dt,
            steps: steps as usize,
        })
    }

    /// Same spatial grid and step with `steps` time steps.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(invalid("steps", "must be >= 1"));
        }
        Ok(Self { steps, ..*self })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_end(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Grid nodes `x_j = j / n`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 / self.n as f64).collect()
    }

    /// Samples `f` at the grid nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(f).collect()
    }
}
