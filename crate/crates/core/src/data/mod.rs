//! Typed tabular data: cells with explicit missingness, column schemas,
//! CSV ingestion and the seeded train/test split.

mod csv_io;
mod schema;
mod split;

use std::collections::BTreeSet;

use thiserror::Error;

pub use csv_io::{
    load_csv, load_csv_unlabeled, parse_numeric, read_csv, read_csv_unlabeled, write_csv,
    write_csv_to,
};
pub use schema::{
    ColumnKind, ColumnRole, ColumnSchema, Schema, BRAND, COLOUR, MANUFACTURER, NUMBER_OF_RATING,
    PRICE, PRODUCTS, RATING, SALES, SHIPMENT, WEIGHT_POUNDS,
};
pub use split::{split_train_test, SplitIndices};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("column {0:?} is missing from the CSV header")]
    MissingColumn(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RowArity {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("degenerate split: {train} train / {test} test rows")]
    DegenerateSplit { train: usize, test: usize },
    #[error("train fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid cell in column {column:?}: {reason}")]
    InvalidCell { column: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// `""`, `NA` and `N/A`, compared case-insensitively after trimming.
pub fn is_missing_token(raw: &str) -> bool {
    let raw = raw.trim();
    raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("n/a")
}

/// One cell of a [`DataTable`].
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    /// Always finite.
    Numeric(f64),
    /// Non-empty, trimmed.
    Categorical(String),
    Missing,
}

impl CellValue {
    /// Finite numbers become `Numeric`, everything else `Missing`.
    pub fn numeric(value: f64) -> Self {
        if value.is_finite() {
            CellValue::Numeric(value)
        } else {
            CellValue::Missing
        }
    }

    /// Trims the token; blank tokens and missing markers become `Missing`.
    pub fn categorical(token: &str) -> Self {
        let token = token.trim();
        if is_missing_token(token) {
            CellValue::Missing
        } else {
            CellValue::Categorical(token.to_string())
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, CellValue::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            CellValue::Numeric(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            CellValue::Categorical(s) => Some(s),
            _ => None,
        }
    }
}

/// Column-typed dataset. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    schema: Schema,
    rows: Vec<Vec<CellValue>>,
}

impl DataTable {
    /// Checks row arity and that each cell agrees with its column kind.
    pub fn new(schema: Schema, rows: Vec<Vec<CellValue>>) -> Result<Self, DataError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(DataError::RowArity {
                    line: i as u64 + 1,
                    expected: schema.len(),
                    found: row.len(),
                });
            }
            for (cell, column) in row.iter().zip(schema.columns()) {
                check_cell(cell, column)?;
            }
        }
        Ok(Self { schema, rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<CellValue>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[CellValue] {
        &self.rows[index]
    }

    /// Number of rows (n).
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of feature columns (m).
    pub fn n_features(&self) -> usize {
        self.schema.feature_count()
    }

    pub fn column(&self, name: &str) -> Result<impl Iterator<Item = &CellValue>, DataError> {
        let idx = self
            .schema
            .index_of(name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))?;
        Ok(self.rows.iter().map(move |r| &r[idx]))
    }

    /// New table holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> DataTable {
        DataTable {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn column_stats(&self, name: &str) -> Result<ColumnStats, DataError> {
        column_stats(self, name)
    }
}

fn check_cell(cell: &CellValue, column: &ColumnSchema) -> Result<(), DataError> {
    let reason = match (cell, column.kind) {
        (CellValue::Missing, _) => return Ok(()),
        (CellValue::Numeric(v), ColumnKind::Numeric) if v.is_finite() => return Ok(()),
        (CellValue::Numeric(_), ColumnKind::Numeric) => "non-finite numeric value",
        (CellValue::Categorical(s), ColumnKind::Categorical)
            if !is_missing_token(s) && s.trim() == s =>
        {
            return Ok(())
        }
        (CellValue::Categorical(_), ColumnKind::Categorical) => {
            "blank, untrimmed or missing-marker token"
        }
        (CellValue::Numeric(_), ColumnKind::Categorical) => "numeric value in categorical column",
        (CellValue::Categorical(_), ColumnKind::Numeric) => "text value in numeric column",
    };
    Err(DataError::InvalidCell {
        column: column.name.clone(),
        reason: reason.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    /// All cells, including missing ones.
    pub count: usize,
    pub missing_count: usize,
    /// Mean of the present values; numeric columns only, absent when every
    /// cell is missing.
    pub mean: Option<f64>,
    /// Categorical columns only.
    pub distinct_values: Option<BTreeSet<String>>,
}

pub fn column_stats(table: &DataTable, name: &str) -> Result<ColumnStats, DataError> {
    let kind = table
        .schema()
        .column(name)
        .ok_or_else(|| DataError::UnknownColumn(name.to_string()))?
        .kind;
    let mut count = 0;
    let mut missing_count = 0;
    let mut sum = 0.0;
    let mut present = 0usize;
    let mut distinct = BTreeSet::new();
    for cell in table.column(name)? {
        count += 1;
        match cell {
            CellValue::Missing => missing_count += 1,
            CellValue::Numeric(v) => {
                sum += v;
                present += 1;
            }
            CellValue::Categorical(s) => {
                distinct.insert(s.clone());
            }
        }
    }
    Ok(match kind {
        ColumnKind::Numeric => ColumnStats {
            count,
            missing_count,
            mean: (present > 0).then(|| sum / present as f64),
            distinct_values: None,
        },
        ColumnKind::Categorical => ColumnStats {
            count,
            missing_count,
            mean: None,
            distinct_values: Some(distinct),
        },
    })
}
