use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("buffer of {len} values cannot be shaped as {rows} x {cols}")]
    Shape {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("{names} column names for {cols} columns")]
    Names { names: usize, cols: usize },
    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Dense row-major matrix of learner inputs with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
    columns: Vec<String>,
}

pub(crate) fn default_column_names(n_cols: usize) -> Vec<String> {
    (0..n_cols).map(|j| format!("f{j}")).collect()
}

impl FeatureMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        data: Vec<f64>,
        columns: Vec<String>,
    ) -> Result<Self, MatrixError> {
        if data.len() != n_rows * n_cols {
            return Err(MatrixError::Shape {
                rows: n_rows,
                cols: n_cols,
                len: data.len(),
            });
        }
        if columns.len() != n_cols {
            return Err(MatrixError::Names {
                names: columns.len(),
                cols: n_cols,
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
            columns,
        })
    }

    /// Builds a matrix with columns named `f0`, `f1`, ...
    pub fn from_rows(rows: &[Vec<f64>], n_cols: usize) -> Result<Self, MatrixError> {
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(MatrixError::RaggedRow {
                    row: i,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, data, default_column_names(n_cols))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            data,
            columns: self.columns.clone(),
        }
    }

    pub fn scaled(&self, factor: f64) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}
