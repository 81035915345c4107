use serde::{Deserialize, Serialize};

use super::metrics::MetricsRow;

/// Outcome for one roster entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReportRow {
    Ok(MetricsRow),
    Failed { model_name: String, error: String },
}

impl ReportRow {
    pub fn model_name(&self) -> &str {
        match self {
            ReportRow::Ok(row) => &row.model_name,
            ReportRow::Failed { model_name, .. } => model_name,
        }
    }

    pub fn metrics(&self) -> Option<&MetricsRow> {
        match self {
            ReportRow::Ok(row) => Some(row),
            ReportRow::Failed { .. } => None,
        }
    }
}

/// Rows in roster order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<ReportRow>,
}

impl MetricsReport {
    pub fn get(&self, model_name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.model_name() == model_name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl ReportFormat {
    /// Picks a format from a file extension; anything unrecognized is text.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => ReportFormat::Csv,
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Text,
        }
    }
}

/// Two decimals, or two-decimal scientific notation (`1.06E+14`) once the
/// magnitude reaches a million.
pub fn format_cell(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value.abs() < 1e6 {
        return format!("{value:.2}");
    }
    let sci = format!("{value:.2e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exponent.abs())
}

const HEADER: [&str; 4] = ["Model", "MSE", "RMSE", "MAE"];

pub fn render_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
            text.push('\n');
            text
        }
    }
}

/// Tab-separated, one model per line.
fn render_text(report: &MetricsReport) -> String {
    let mut out = HEADER.join("\t");
    out.push('\n');
    for row in &report.rows {
        let line = match row {
            ReportRow::Ok(m) => [
                m.model_name.clone(),
                format_cell(m.mse),
                format_cell(m.rmse),
                format_cell(m.mae),
            ]
            .join("\t"),
            ReportRow::Failed { model_name, error } => format!("{model_name}\tFAILED: {error}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Full precision; failed rows leave the metrics empty and fill `Error`.
fn render_csv(report: &MetricsReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let header = HEADER.iter().copied().chain(["Error"]);
    writer.write_record(header).expect("in-memory write");
    for row in &report.rows {
        let record = match row {
            ReportRow::Ok(m) => [
                m.model_name.clone(),
                m.mse.to_string(),
                m.rmse.to_string(),
                m.mae.to_string(),
                String::new(),
            ],
            ReportRow::Failed { model_name, error } => [
                model_name.clone(),
                String::new(),
                String::new(),
                String::new(),
                error.clone(),
            ],
        };
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
