use std::collections::HashSet;

use crate::error::{Result, SvddError};

/// Dense row-major matrix of observations: `n_rows` observations with
/// `n_cols` features each.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// An empty matrix with a fixed feature dimension.
    pub fn empty(n_cols: usize) -> Self {
        DataMatrix {
            n_rows: 0,
            n_cols,
            values: Vec::new(),
        }
    }

    pub fn from_flat(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows * n_cols != values.len() {
            return Err(SvddError::input(format!(
                "{} values cannot form a {}x{} matrix",
                values.len(),
                n_rows,
                n_cols
            )));
        }
        if n_cols == 0 && n_rows > 0 {
            return Err(SvddError::input("observations need at least one feature"));
        }
        Ok(DataMatrix {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut m = DataMatrix::empty(n_cols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(SvddError::input(format!(
                "row has {} features, expected {}",
                row.len(),
                self.n_cols
            )));
        }
        self.values.extend_from_slice(row);
        self.n_rows += 1;
        Ok(())
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            values,
        }
    }

    /// Contiguous block of rows `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> DataMatrix {
        DataMatrix {
            n_rows: end - start,
            n_cols: self.n_cols,
            values: self.values[start * self.n_cols..end * self.n_cols].to_vec(),
        }
    }

    /// Per-column (min, max).
    pub fn column_bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.n_cols];
        for r in self.rows() {
            for (acc, &x) in b.iter_mut().zip(r) {
                acc.0 = acc.0.min(x);
                acc.1 = acc.1.max(x);
            }
        }
        b
    }

    /// Union of row sets with exact-duplicate rows removed. Rows keep the
    /// order of first appearance.
    pub fn union_dedup<'a>(parts: impl IntoIterator<Item = &'a DataMatrix>) -> Result<DataMatrix> {
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut out: Option<DataMatrix> = None;
        for part in parts {
            let acc = out.get_or_insert_with(|| DataMatrix::empty(part.n_cols));
            if acc.n_cols != part.n_cols {
                return Err(SvddError::input("cannot union matrices of different widths"));
            }
            for r in part.rows() {
                if seen.insert(row_key(r)) {
                    acc.push_row(r)?;
                }
            }
        }
        out.ok_or_else(|| SvddError::input("union of zero matrices"))
    }
}

/// Bit pattern of a row, with `-0.0` folded onto `+0.0`.
pub(crate) fn row_key(row: &[f64]) -> Vec<u64> {
    row.iter().map(|x| (x + 0.0).to_bits()).collect()
}
