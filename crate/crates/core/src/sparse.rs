//! Compressed sparse row matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real sparse matrix in CSR form with sorted, de-duplicated column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// On-disk form: explicit triplets.
#[derive(Serialize, Deserialize)]
struct SparseOpFile {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl Serialize for SparseOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SparseOpFile { rows: self.rows, cols: self.cols, triplets: self.triplets().collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = SparseOpFile::deserialize(d)?;
        SparseOp::from_triplets(f.rows, f.cols, f.triplets).map_err(serde::de::Error::custom)
    }
}

impl SparseOp {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite entry at ({r}, {c})")));
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self { rows, cols, indptr, indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.rows];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.cols || y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to {} -> {}",
                self.rows,
                self.cols,
                x.len(),
                y.len()
            )));
        }
        for (r, out) in y.iter_mut().enumerate() {
            let (idx, val) = self.row(r);
            *out = idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum();
        }
        Ok(())
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.cols];
        self.apply_transpose_into(y, &mut x)?;
        Ok(x)
    }

    /// `x = A^T y`.
    pub fn apply_transpose_into(&self, y: &[f64], x: &mut [f64]) -> Result<()> {
        if y.len() != self.rows || x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix transposed onto {} -> {}",
                self.rows,
                self.cols,
                y.len(),
                x.len()
            )));
        }
        x.fill(0.0);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                x[c] += v * yr;
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, t).expect("transpose keeps indices in range")
    }

    /// `sum_k w_k A_k` for equally shaped matrices.
    pub fn linear_combination(terms: &[(f64, &SparseOp)]) -> Result<Self> {
        let Some(&(_, first)) = terms.first() else {
            return Err(Error::DimensionMismatch("empty linear combination".into()));
        };
        let (rows, cols) = (first.rows, first.cols);
        let mut t = Vec::new();
        for &(w, a) in terms {
            if a.rows != rows || a.cols != cols {
                return Err(Error::DimensionMismatch(format!(
                    "cannot combine {}x{} with {rows}x{cols}",
                    a.rows, a.cols
                )));
            }
            if w != 0.0 {
                t.extend(a.triplets().map(|(r, c, v)| (r, c, w * v)));
            }
        }
        Self::from_triplets(rows, cols, t)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    /// Dense row-major copy; intended for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }
}
