//! Dense real matrix with observations in rows and variables in columns.
//!
//! Storage is column-major because most transforms in this crate work one
//! variable at a time.

use crate::error::{Error, Result};

/// An `n x p` table of real observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            values: vec![0.0; n * p],
        }
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        if p == 0 {
            return Err(Error::Dimension("matrix needs at least one column".into()));
        }
        let n = columns[0].len();
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Dimension(format!(
                "column {i} has {} rows, expected {n}",
                c.len()
            )));
        }
        Ok(Self {
            n,
            p,
            values: columns.into_iter().flatten().collect(),
        })
    }

    /// Builds a matrix from row vectors of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if p == 0 {
            return Err(Error::Dimension("matrix needs at least one column".into()));
        }
        let mut m = Self::zeros(n, p);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Dimension(format!(
                    "row {r} has {} entries, expected {p}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_row_major(n: usize, p: usize, buf: &[f64]) -> Result<Self> {
        if buf.len() != n * p {
            return Err(Error::Dimension(format!(
                "buffer of length {} cannot hold {n}x{p}",
                buf.len()
            )));
        }
        let mut m = Self::zeros(n, p);
        for r in 0..n {
            for c in 0..p {
                m.set(r, c, buf[r * p + c]);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.n + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[col * self.n + row] = v;
    }

    #[inline]
    pub fn column(&self, col: usize) -> &[f64] {
        &self.values[col * self.n..(col + 1) * self.n]
    }

    #[inline]
    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.values[col * self.n..(col + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.p).map(move |c| self.column(c))
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.p).map(|c| self.get(row, c)).collect()
    }

    pub fn row_into(&self, row: usize, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate().take(self.p) {
            *o = self.get(row, c);
        }
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.p);
        for r in 0..self.n {
            for c in 0..self.p {
                out.push(self.get(r, c));
            }
        }
        out
    }

    /// Selects a subset of columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let columns = cols.iter().map(|&c| self.column(c).to_vec()).collect();
        Self::from_columns(columns).expect("selected columns share a length")
    }

    /// Fails with an input error naming the first non-finite entry.
    pub fn ensure_finite(&self) -> Result<()> {
        for c in 0..self.p {
            if let Some(r) = self.column(c).iter().position(|v| !v.is_finite()) {
                return Err(Error::Input(format!(
                    "non-finite value {} at row {r}, column {c}",
                    self.get(r, c)
                )));
            }
        }
        Ok(())
    }

    pub fn ensure_shape(&self, n: usize, p: usize) -> Result<()> {
        if self.n != n || self.p != p {
            return Err(Error::Dimension(format!(
                "expected {n}x{p} matrix, got {}x{}",
                self.n, self.p
            )));
        }
        Ok(())
    }
}
