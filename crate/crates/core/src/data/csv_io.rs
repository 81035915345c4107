use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{is_missing_token, CellValue, ColumnKind, ColumnRole, DataError, DataTable, Schema};

const CURRENCY_SYMBOLS: &[char] = &['$', '£', '€', '¥'];

/// Parses a numeric field the way listings print them: a leading currency
/// symbol and `,` thousands separators are stripped. Anything that does not
/// parse to a finite number is `None`.
pub fn parse_numeric(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    if is_missing_token(raw) {
        return None;
    }
    let (negative, rest) = match raw.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, raw),
    };
    let rest = rest
        .strip_prefix(CURRENCY_SYMBOLS)
        .unwrap_or(rest)
        .trim_start();
    let cleaned: String = rest.chars().filter(|&c| c != ',').collect();
    // `f64::from_str` accepts "inf" and "nan"; those are not data.
    if !cleaned.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == '+') {
        return None;
    }
    let value: f64 = cleaned.parse().ok()?;
    let value = if negative { -value } else { value };
    value.is_finite().then_some(value)
}

fn parse_cell(raw: &str, kind: ColumnKind) -> CellValue {
    match kind {
        ColumnKind::Numeric => parse_numeric(raw).map_or(CellValue::Missing, CellValue::Numeric),
        ColumnKind::Categorical => CellValue::categorical(raw),
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<DataTable, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, schema)
}

/// Reads comma-delimited, double-quote escaped CSV with a mandatory header.
/// Columns are matched to the schema by exact header name; extra columns are
/// ignored.
pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<DataTable, DataError> {
    read_records(reader, schema, false)
}

/// Like [`load_csv`] for data to be scored: the target column may be absent,
/// in which case every target cell is missing.
pub fn load_csv_unlabeled(path: impl AsRef<Path>, schema: &Schema) -> Result<DataTable, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv_unlabeled(file, schema)
}

pub fn read_csv_unlabeled<R: Read>(reader: R, schema: &Schema) -> Result<DataTable, DataError> {
    read_records(reader, schema, true)
}

fn read_records<R: Read>(
    reader: R,
    schema: &Schema,
    target_optional: bool,
) -> Result<DataTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = reader.headers()?.clone();
    let positions = schema
        .columns()
        .iter()
        .map(
            |column| match headers.iter().position(|h| h == column.name) {
                Some(pos) => Ok(Some(pos)),
                None if target_optional && column.role == ColumnRole::Target => Ok(None),
                None => Err(DataError::MissingColumn(column.name.clone())),
            },
        )
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(DataError::RowArity {
                line: record.position().map_or(0, |p| p.line()),
                expected: headers.len(),
                found: record.len(),
            });
        }
        let row = positions
            .iter()
            .zip(schema.columns())
            .map(|(&pos, column)| match pos {
                Some(pos) => parse_cell(&record[pos], column.kind),
                None => CellValue::Missing,
            })
            .collect();
        rows.push(row);
    }
    DataTable::new(schema.clone(), rows)
}

pub fn write_csv(table: &DataTable, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv_to(table, file)
}

/// Missing cells are written as empty fields; numbers use the shortest text
/// that parses back to the same value.
pub fn write_csv_to<W: Write>(table: &DataTable, writer: W) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_writer(writer);
    writer.write_record(table.schema().columns().iter().map(|c| c.name.as_str()))?;
    for row in table.rows() {
        writer.write_record(row.iter().map(|cell| match cell {
            CellValue::Numeric(v) => v.to_string(),
            CellValue::Categorical(s) => s.clone(),
            CellValue::Missing => String::new(),
        }))?;
    }
    writer.flush().map_err(|source| DataError::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}
