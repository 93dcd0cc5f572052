//! Multi-threaded ensembles. Trajectory `i` always draws from stream `i` of
//! the master seed and results are collected in index order, so the record
//! does not depend on the worker count.

use rayon::prelude::*;
use subtractor_core::engine::{Controls, EnsembleRecord, Evolver};
use subtractor_core::model::ModelOperators;
use subtractor_core::Error;

use crate::error::RunError;

/// Thread pool with `workers` threads; 0 means one per available core.
pub fn pool(workers: usize) -> Result<rayon::ThreadPool, RunError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::config("workers", e.to_string()))
}

pub fn run_ensemble_parallel(
    pool: &rayon::ThreadPool,
    model: &ModelOperators,
    n_traj: usize,
    master_seed: u64,
    controls: Controls,
) -> Result<EnsembleRecord, Error> {
    if n_traj == 0 {
        return Err(Error::InvalidInput("n_traj must be at least 1".into()));
    }
    let evolver = Evolver::new(model, controls)?;
    let trajectories = pool.install(|| {
        (0..n_traj as u64)
            .into_par_iter()
            .map(|i| {
                evolver.trajectory(master_seed, i).map_err(|e| Error::TrajectoryFailed {
                    seed_index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    Ok(EnsembleRecord::from_trajectories(&evolver, trajectories, master_seed))
}
