//! Product-space reformulation: block vectors in `R^{nm}` and the diagonal
//! subspace `D = {(x, ..., x)}`.

use nalgebra::DVectorView;

use crate::error::{check_dim, CfpError, Result};
use crate::geometry::Vector;

/// `m` blocks of dimension `n`, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    data: Vector,
    block_dim: usize,
}

impl BlockVector {
    pub fn new(blocks: &[Vector]) -> Result<Self> {
        let first = blocks.first().ok_or(CfpError::EmptyVector)?;
        let n = first.len();
        if n == 0 {
            return Err(CfpError::EmptyVector);
        }
        let mut data = Vector::zeros(n * blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            check_dim(n, b.len())?;
            data.rows_mut(i * n, n).copy_from(b);
        }
        Ok(Self { data, block_dim: n })
    }

    pub fn from_flat(data: Vector, block_dim: usize) -> Result<Self> {
        if block_dim == 0 || data.is_empty() {
            return Err(CfpError::EmptyVector);
        }
        if !data.len().is_multiple_of(block_dim) {
            return Err(CfpError::DimensionMismatch {
                expected: block_dim * (data.len() / block_dim + 1),
                found: data.len(),
            });
        }
        Ok(Self { data, block_dim })
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn num_blocks(&self) -> usize {
        self.data.len() / self.block_dim
    }

    pub fn block(&self, i: usize) -> DVectorView<'_, f64> {
        self.data.rows(i * self.block_dim, self.block_dim)
    }

    pub fn blocks(&self) -> impl Iterator<Item = DVectorView<'_, f64>> + '_ {
        (0..self.num_blocks()).map(move |i| self.block(i))
    }

    pub fn as_flat(&self) -> &Vector {
        &self.data
    }

    pub fn into_flat(self) -> Vector {
        self.data
    }
}

/// `(x, x, ..., x)` with `m` copies.
pub fn lift(x: &Vector, m: usize) -> BlockVector {
    assert!(m >= 1, "lift needs at least one block");
    let n = x.len();
    let mut data = Vector::zeros(n * m);
    for i in 0..m {
        data.rows_mut(i * n, n).copy_from(x);
    }
    BlockVector { data, block_dim: n }
}

pub fn diag_project(v: &BlockVector) -> BlockVector {
    BlockVector {
        data: diag_project_flat(&v.data, v.block_dim),
        block_dim: v.block_dim,
    }
}

pub fn diag_reflect(v: &BlockVector) -> BlockVector {
    BlockVector {
        data: diag_reflect_flat(&v.data, v.block_dim),
        block_dim: v.block_dim,
    }
}

/// Blockwise mean of a flat `m * n` vector.
pub fn block_mean(data: &Vector, block_dim: usize) -> Vector {
    let m = data.len() / block_dim;
    let mut mean = Vector::zeros(block_dim);
    for j in 0..block_dim {
        mean[j] = pairwise_sum(data.as_slice(), j, block_dim, 0, m) / m as f64;
    }
    mean
}

// Sum of data[j + i * stride] for i in lo..hi, summed pairwise so the
// reduction order is fixed by the block count alone.
fn pairwise_sum(data: &[f64], j: usize, stride: usize, lo: usize, hi: usize) -> f64 {
    match hi - lo {
        0 => 0.0,
        1 => data[j + lo * stride],
        2 => data[j + lo * stride] + data[j + (lo + 1) * stride],
        len => {
            let mid = lo + len / 2;
            pairwise_sum(data, j, stride, lo, mid) + pairwise_sum(data, j, stride, mid, hi)
        }
    }
}

pub fn diag_project_flat(data: &Vector, block_dim: usize) -> Vector {
    let mean = block_mean(data, block_dim);
    lift(&mean, data.len() / block_dim).into_flat()
}

pub fn diag_reflect_flat(data: &Vector, block_dim: usize) -> Vector {
    diag_project_flat(data, block_dim) * 2.0 - data
}
