//! Sobol low-discrepancy points with seeded random digital shifts.
//!
//! Direction numbers are the Joe-Kuo set for the first sixteen dimensions.
//! A digital shift (XOR with a random 32-bit word per coordinate) keeps the
//! net structure of the point set while making each batch an unbiased
//! estimator, so independent shifts give a batch-variance error bar.

use crate::prelude::*;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;
const BITS: usize = 32;

// (degree s, inner coefficients a, initial m_1..m_s) for dimensions 2..=16.
const JOE_KUO: [(u32, u32, &[u32]); MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

#[derive(Debug, Clone)]
pub struct Sobol {
    dim: usize,
    directions: Vec<[u32; BITS]>,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Quadrature(alloc::format!(
                "Sobol points available for 1..={MAX_DIM} dimensions, requested {dim}"
            )));
        }
        let mut directions = Vec::with_capacity(dim);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1u32 << (BITS - 1 - k);
        }
        directions.push(first);
        for &(s, a, m_init) in JOE_KUO.iter().take(dim - 1) {
            let s = s as usize;
            let mut m = [0u32; BITS];
            m[..s].copy_from_slice(m_init);
            for k in s..BITS {
                let mut val = m[k - s] ^ (m[k - s] << s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        val ^= m[k - j] << j;
                    }
                }
                m[k] = val;
            }
            let mut v = [0u32; BITS];
            for k in 0..BITS {
                v[k] = m[k] << (BITS - 1 - k);
            }
            directions.push(v);
        }
        Ok(Sobol { dim, directions })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Integer coordinates of point `index` (Gray-code ordering).
    pub fn raw(&self, index: u32, out: &mut [u32]) {
        let gray = index ^ (index >> 1);
        for (d, o) in out.iter_mut().enumerate().take(self.dim) {
            let mut x = 0u32;
            let mut g = gray;
            let mut bit = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= self.directions[d][bit];
                }
                g >>= 1;
                bit += 1;
            }
            *o = x;
        }
    }

    /// Point `index` in `[0,1)^dim` after XOR with `shift`.
    pub fn point(&self, index: u32, shift: &[u32], out: &mut [f64]) {
        let mut raw = [0u32; MAX_DIM];
        self.raw(index, &mut raw[..self.dim]);
        for d in 0..self.dim {
            // Offset by half an ulp of the 32-bit grid so points stay off the cell edges.
            out[d] = ((raw[d] ^ shift[d]) as f64 + 0.5) / 4_294_967_296.0;
        }
    }
}

/// Independent digital shifts, one row per batch, derived from `seed`.
pub fn digital_shifts(seed: u64, batches: usize, dim: usize) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..batches)
        .map(|_| {
            let mut row = vec![0u32; dim];
            for x in row.iter_mut() {
                *x = rng.next_u32();
            }
            row
        })
        .collect()
}

/// Deterministic uniform points in `[0,1)^dim`, used for sampling plans.
pub fn sample_unit_cube(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let sobol = Sobol::new(dim)?;
    let shift = digital_shifts(seed, 1, dim).remove(0);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut p = vec![0.0; dim];
        sobol.point(i as u32, &shift, &mut p);
        out.push(p);
    }
    Ok(out)
}
