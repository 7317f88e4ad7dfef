//! Replica fan-out. Each replica's noise is `(master_seed, index)`, so the
//! outcome of a replica never depends on scheduling, and results are
//! always returned sorted by replica index.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::NoiseStream;

/// One replica's result, or the reason it failed.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaOutcome<T> {
    pub replica: u64,
    pub result: std::result::Result<T, String>,
}

impl<T> ReplicaOutcome<T> {
    pub fn censored(&self) -> bool {
        self.result.is_err()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<T> {
    pub outcomes: Vec<ReplicaOutcome<T>>,
}

impl<T> Ensemble<T> {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn failures(&self) -> impl Iterator<Item = (u64, &str)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| (o.replica, e.as_str())))
    }

    /// Successful results in replica order.
    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.outcomes.iter().filter_map(|o| o.result.as_ref().ok())
    }

    /// All results, or an error naming the first failed replica.
    pub fn into_complete(self) -> Result<Vec<T>> {
        self.outcomes
            .into_iter()
            .map(|o| {
                o.result
                    .map_err(|e| Error::Precondition(format!("replica {} failed: {e}", o.replica)))
            })
            .collect()
    }
}

/// Runs `job` for every replica in `range` on `workers` threads (1 means
/// the calling thread only).
pub fn replicate<T, F>(master_seed: u64, range: Range<u64>, workers: usize, job: F) -> Result<Ensemble<T>>
where
    T: Send,
    F: Fn(NoiseStream) -> Result<T> + Sync,
{
    let run = |replica: u64| ReplicaOutcome {
        replica,
        result: job(NoiseStream::new(master_seed, replica)).map_err(|e| e.to_string()),
    };
    let outcomes = if workers <= 1 {
        range.map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
        pool.install(|| range.into_par_iter().map(run).collect())
    };
    Ok(Ensemble { outcomes })
}

/// Worker count used when none is given.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
