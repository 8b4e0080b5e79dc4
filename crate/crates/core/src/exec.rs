//! Node-evaluation executors.
//!
//! Quadrature splits its nodes into fixed, index-ordered chunks and asks an
//! executor to evaluate them. Chunk results are always combined in chunk
//! order, so a parallel executor yields bit-identical sums.

use crate::prelude::*;

use crate::error::Result;
use crate::linalg::CompensatedSum;

pub type ChunkJob<'a> = dyn Fn(usize) -> Result<CompensatedSum> + Sync + 'a;

pub trait Executor: Sync {
    /// Evaluate `job(0..chunks)`, returning results in chunk order.
    fn run(&self, chunks: usize, job: &ChunkJob<'_>) -> Vec<Result<CompensatedSum>>;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn run(&self, chunks: usize, job: &ChunkJob<'_>) -> Vec<Result<CompensatedSum>> {
        (0..chunks).map(job).collect()
    }
}
