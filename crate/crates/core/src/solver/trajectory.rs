use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::NoiseStream;
use crate::error::{invalid, Error, Result};
use crate::grid::TorusGrid;

/// Per-step spatial statistics of a field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl StepStats {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            min: Vec::with_capacity(n),
            max: Vec::with_capacity(n),
            mean: Vec::with_capacity(n),
            variance: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, field: &[f64]) {
        let (mean, variance) = crate::numerics::mean_variance(field);
        let (lo, hi) = field
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        self.min.push(lo);
        self.max.push(hi);
        self.mean.push(mean);
        self.variance.push(variance);
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }
}

/// A realised solution: stored snapshots plus extrema at every step.
///
/// Indices are relative to `start_step`; index `i` is time
/// `(start_step + i) Δt`. Snapshots are kept every `stride` steps and at
/// the last computed step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathTrajectory {
    pub(crate) grid: TorusGrid,
    pub(crate) stream: NoiseStream,
    pub(crate) start_step: usize,
    pub(crate) stride: usize,
    pub(crate) snapshot_steps: Vec<usize>,
    pub(crate) snapshots: Vec<Vec<f64>>,
    pub(crate) stats: StepStats,
    pub(crate) stopped_early: bool,
}

impl PathTrajectory {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn stream(&self) -> NoiseStream {
        self.stream
    }

    pub fn start_step(&self) -> usize {
        self.start_step
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Number of computed steps (the trajectory holds `steps() + 1` times).
    pub fn steps(&self) -> usize {
        self.stats.len() - 1
    }

    /// True when a stop rule ended the run before the grid horizon.
    pub fn stopped_early(&self) -> bool {
        self.stopped_early
    }

    pub fn time(&self, index: usize) -> f64 {
        (self.start_step + index) as f64 * self.grid.dt()
    }

    pub fn stats(&self) -> &StepStats {
        &self.stats
    }

    pub fn running_min(&self) -> &[f64] {
        &self.stats.min
    }

    pub fn running_max(&self) -> &[f64] {
        &self.stats.max
    }

    pub fn snapshot_steps(&self) -> &[usize] {
        &self.snapshot_steps
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.snapshot_steps
            .iter()
            .copied()
            .zip(self.snapshots.iter().map(Vec::as_slice))
    }

    pub fn snapshot(&self, index: usize) -> Option<&[f64]> {
        self.snapshot_steps
            .binary_search(&index)
            .ok()
            .map(|i| self.snapshots[i].as_slice())
    }

    pub fn initial(&self) -> &[f64] {
        &self.snapshots[0]
    }

    pub fn final_field(&self) -> &[f64] {
        &self.snapshots[self.snapshots.len() - 1]
    }

    /// Binary snapshot file: a 32-byte little-endian header
    /// `(n: u64, dt: f64, stride: u64, count: u64)` followed by `count`
    /// fields of `n` little-endian `f64` values, row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&self.grid.dt().to_le_bytes())?;
        w.write_all(&(self.stride as u64).to_le_bytes())?;
        w.write_all(&(self.snapshots.len() as u64).to_le_bytes())?;
        for field in &self.snapshots {
            for v in field {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// CSV with columns `t,min,max,mean,variance`, one row per step.
    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,min,max,mean,variance")?;
        for i in 0..self.stats.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.time(i),
                self.stats.min[i],
                self.stats.max[i],
                self.stats.mean[i],
                self.stats.variance[i]
            )?;
        }
        Ok(())
    }
}

/// Contents of a binary snapshot file.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub n: usize,
    pub dt: f64,
    pub stride: usize,
    pub fields: Vec<Vec<f64>>,
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SnapshotFile> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let n = u64::from_le_bytes(next(&mut r)?) as usize;
    let dt = f64::from_le_bytes(next(&mut r)?);
    let stride = u64::from_le_bytes(next(&mut r)?) as usize;
    let count = u64::from_le_bytes(next(&mut r)?) as usize;
    if n == 0 || n > 1 << 24 || count > 1 << 32 {
        return Err(invalid("snapshot header", format!("implausible n={n}, count={count}")));
    }
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let mut field = Vec::with_capacity(n);
        for _ in 0..n {
            field.push(f64::from_le_bytes(next(&mut r)?));
        }
        fields.push(field);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Precondition(format!(
            "{} trailing bytes after snapshot data",
            rest.len()
        )));
    }
    Ok(SnapshotFile {
        n,
        dt,
        stride,
        fields,
    })
}
