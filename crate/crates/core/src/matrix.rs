//! Column-compressed feature matrix.
//!
//! One-hot encoded tabular data is overwhelmingly zero, so each column keeps
//! only its non-zero entries in row order. Logically the matrix is dense: any
//! `(row, col)` not stored reads as `0.0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseColumn {
    rows: Vec<u32>,
    values: Vec<f64>,
}

impl SparseColumn {
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows.iter().map(|&r| r as usize).zip(self.values.iter().copied())
    }

    fn get(&self, row: usize) -> f64 {
        match self.rows.binary_search(&(row as u32)) {
            Ok(i) => self.values[i],
            Err(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    columns: Vec<SparseColumn>,
}

impl FeatureMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, columns: vec![SparseColumn::default(); n_cols] }
    }

    /// Builds from row-major dense storage.
    pub fn from_dense(n_rows: usize, n_cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch { expected: n_rows * n_cols, found: data.len() });
        }
        let mut builder = ColumnBuilder::new(n_rows, n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                builder.push(r, c, data[r * n_cols + c]);
            }
        }
        Ok(builder.finish())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut builder = ColumnBuilder::new(rows.len(), n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::LengthMismatch { expected: n_cols, found: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                builder.push(r, c, v);
            }
        }
        Ok(builder.finish())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &SparseColumn {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[SparseColumn] {
        &self.columns
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.n_rows, "row {row} out of bounds");
        self.columns[col].get(row)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseColumn::nnz).sum()
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols()]; self.n_rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col.iter() {
                out[r][c] = v;
            }
        }
        out
    }

    /// Row-major sparse view, used for per-row tree traversal.
    pub fn to_rows(&self) -> RowMatrix {
        let mut counts = vec![0usize; self.n_rows + 1];
        for col in &self.columns {
            for &r in &col.rows {
                counts[r as usize + 1] += 1;
            }
        }
        for i in 0..self.n_rows {
            counts[i + 1] += counts[i];
        }
        let nnz = counts[self.n_rows];
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0; nnz];
        let mut cursor = counts.clone();
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col.iter() {
                let at = cursor[r];
                cols[at] = c as u32;
                vals[at] = v;
                cursor[r] += 1;
            }
        }
        RowMatrix { offsets: counts, cols, vals }
    }

    /// New matrix holding `rows` in the given order. Rows may repeat.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        // targets[start[r]..start[r + 1]] are the new positions of old row r
        let mut start = vec![0usize; self.n_rows + 1];
        for &old in rows {
            start[old + 1] += 1;
        }
        for r in 0..self.n_rows {
            start[r + 1] += start[r];
        }
        let mut cursor = start.clone();
        let mut targets = vec![0u32; rows.len()];
        for (new, &old) in rows.iter().enumerate() {
            targets[cursor[old]] = new as u32;
            cursor[old] += 1;
        }
        let ordered = rows.windows(2).all(|w| w[0] < w[1]);
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let mut pairs: Vec<(u32, f64)> = col
                    .iter()
                    .flat_map(|(r, v)| targets[start[r]..start[r + 1]].iter().map(move |&n| (n, v)))
                    .collect();
                if !ordered {
                    pairs.sort_by_key(|p| p.0);
                }
                SparseColumn {
                    rows: pairs.iter().map(|p| p.0).collect(),
                    values: pairs.iter().map(|p| p.1).collect(),
                }
            })
            .collect();
        Self { n_rows: rows.len(), columns }
    }

    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        for (c, col) in self.columns.iter().enumerate() {
            if let Some((r, _)) = col.iter().find(|(_, v)| !v.is_finite()) {
                return Some((r, c));
            }
        }
        None
    }
}

/// Accumulates entries column by column; rows must be pushed in ascending
/// order within each column.
#[derive(Debug)]
pub struct ColumnBuilder {
    n_rows: usize,
    columns: Vec<SparseColumn>,
}

impl ColumnBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, columns: vec![SparseColumn::default(); n_cols] }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        if value == 0.0 {
            return;
        }
        let column = &mut self.columns[col];
        debug_assert!(column.rows.last().map_or(true, |&r| (r as usize) < row));
        column.rows.push(row as u32);
        column.values.push(value);
    }

    pub fn finish(self) -> FeatureMatrix {
        FeatureMatrix { n_rows: self.n_rows, columns: self.columns }
    }
}

#[derive(Debug, Clone)]
pub struct RowMatrix {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl RowMatrix {
    pub fn n_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, r: usize) -> RowRef<'_> {
        let (a, b) = (self.offsets[r], self.offsets[r + 1]);
        RowRef { cols: &self.cols[a..b], vals: &self.vals[a..b] }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RowRef<'a> {
    cols: &'a [u32],
    vals: &'a [f64],
}

impl RowRef<'_> {
    pub fn get(&self, col: usize) -> f64 {
        match self.cols.binary_search(&(col as u32)) {
            Ok(i) => self.vals[i],
            Err(_) => 0.0,
        }
    }
}
