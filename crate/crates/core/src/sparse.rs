//! Minimal sparse containers: a compressed-row matrix built from triplets and
//! a block-diagonal matrix with one dense block per triangle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros are kept.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let p = next[r];
            cols[p] = c;
            vals[p] = v;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_by_key(|&(c, _)| c);
            let mut iter = scratch.iter().peekable();
            while let Some(&(c, mut v)) = iter.next() {
                while let Some(&&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `self^T y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, v) in cols.iter().zip(vals) {
                out[c] += v * yr;
            }
        }
        out
    }

    /// `scale * self^T self`, accumulated row by row.
    pub fn gram(&self, scale: f64) -> CsrMatrix {
        let mut trip = Vec::new();
        self.gram_triplets(scale, &mut trip);
        CsrMatrix::from_triplets(self.ncols, self.ncols, &trip)
    }

    pub fn gram_triplets(&self, scale: f64, out: &mut Vec<(usize, usize, f64)>) {
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&ci, vi) in cols.iter().zip(vals) {
                for (&cj, vj) in cols.iter().zip(vals) {
                    out.push((ci, cj, scale * vi * vj));
                }
            }
        }
    }

    /// Vertical stack `[self; other]`.
    pub fn vstack(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.ncols, other.ncols
            )));
        }
        let mut row_ptr = self.row_ptr.clone();
        let base = self.nnz();
        row_ptr.extend(other.row_ptr[1..].iter().map(|p| p + base));
        let mut col_idx = self.col_idx.clone();
        col_idx.extend_from_slice(&other.col_idx);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(CsrMatrix {
            nrows: self.nrows + other.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn add(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let trip: Vec<_> = self.triplets().chain(other.triplets()).collect();
        Ok(CsrMatrix::from_triplets(self.nrows, self.ncols, &trip))
    }

    /// Largest absolute entry of `self - self^T`, relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut big: f64 = 0.0;
        for (r, c, v) in self.triplets() {
            big = big.max(v.abs());
            worst = worst.max((v - self.get(c, r)).abs());
        }
        if big == 0.0 {
            0.0
        } else {
            worst / big
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }
}

/// Block-diagonal matrix with equally sized dense blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    block_rows: usize,
    block_cols: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl BlockDiagonal {
    pub fn new(block_rows: usize, block_cols: usize, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        for b in &blocks {
            if b.nrows() != block_rows || b.ncols() != block_cols {
                return Err(Error::DimensionMismatch(format!(
                    "block is {}x{}, expected {block_rows}x{block_cols}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(BlockDiagonal {
            block_rows,
            block_cols,
            blocks,
        })
    }

    pub fn identity(n_blocks: usize, size: usize) -> Self {
        BlockDiagonal {
            block_rows: size,
            block_cols: size,
            blocks: vec![DMatrix::identity(size, size); n_blocks],
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.block_rows, self.block_cols)
    }

    pub fn nrows(&self) -> usize {
        self.block_rows * self.blocks.len()
    }

    pub fn ncols(&self) -> usize {
        self.block_cols * self.blocks.len()
    }

    pub fn block(&self, t: usize) -> &DMatrix<f64> {
        &self.blocks[t]
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols());
        let mut out = Vec::with_capacity(self.nrows());
        for (t, b) in self.blocks.iter().enumerate() {
            let xs = DVector::from_column_slice(&x[t * self.block_cols..(t + 1) * self.block_cols]);
            out.extend((b * xs).iter());
        }
        out
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows());
        let mut out = Vec::with_capacity(self.ncols());
        for (t, b) in self.blocks.iter().enumerate() {
            let ys = DVector::from_column_slice(&y[t * self.block_rows..(t + 1) * self.block_rows]);
            out.extend((b.tr_mul(&ys)).iter());
        }
        out
    }

    /// Blockwise sum.
    pub fn add(&self, other: &BlockDiagonal) -> Result<BlockDiagonal> {
        if self.block_shape() != other.block_shape() || self.num_blocks() != other.num_blocks() {
            return Err(Error::DimensionMismatch("block-diagonal sum".into()));
        }
        Ok(BlockDiagonal {
            block_rows: self.block_rows,
            block_cols: self.block_cols,
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut trip = Vec::new();
        for (t, b) in self.blocks.iter().enumerate() {
            for j in 0..self.block_cols {
                for i in 0..self.block_rows {
                    let v = b[(i, j)];
                    if v != 0.0 {
                        trip.push((t * self.block_rows + i, t * self.block_cols + j, v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.nrows(), self.ncols(), &trip)
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
