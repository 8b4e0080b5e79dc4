//! Rayon-backed chunk executor.

use rayon::prelude::*;

use bifindex_core::exec::{ChunkJob, Executor};
use bifindex_core::linalg::CompensatedSum;

/// Evaluates chunks on a private pool; results come back in chunk order, so
/// sums match the serial executor bit for bit.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` lets rayon pick.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        Ok(RayonExecutor { pool: rayon::ThreadPoolBuilder::new().num_threads(threads).build()? })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn run(&self, chunks: usize, job: &ChunkJob<'_>) -> Vec<bifindex_core::Result<CompensatedSum>> {
        self.pool.install(|| (0..chunks).into_par_iter().map(job).collect())
    }
}
