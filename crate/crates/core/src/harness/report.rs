//! Summary tables and their CSV/markdown serializations, plus the per-record
//! CSV used to re-aggregate old runs.

use super::{HarnessError, MetricKind, MetricRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    pub metric: MetricKind,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub n: usize,
    /// How many +infinity sentinels (identical-image PSNR) the group held.
    pub infinite_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

/// Serialize a summary table. CSV columns are exactly
/// `model,metric,mean,max,min,n`; markdown mirrors the benchmark table shape
/// (model-grouped metric rows with Mean/Max/Min and direction arrows).
pub fn emit_report(table: &SummaryTable, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(table),
        ReportFormat::Markdown => emit_markdown(table),
    }
}

fn emit_csv(table: &SummaryTable) -> String {
    let mut out = String::from("model,metric,mean,max,min,n\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.model,
            row.metric.name(),
            row.mean,
            row.max,
            row.min,
            row.n
        ));
    }
    out
}

/// Human-facing cell formatting: 4 significant digits, trailing zeros
/// trimmed. The CSV keeps full shortest-round-trip precision instead.
fn fmt_sig(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (3 - exponent).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn emit_markdown(table: &SummaryTable) -> String {
    let mut out = String::from("| Model | Metric | Mean | Max | Min |\n|---|---|---|---|---|\n");
    let mut last_model: Option<&str> = None;
    let mut any_infinite = false;
    for row in &table.rows {
        let model_cell = if last_model == Some(row.model.as_str()) {
            ""
        } else {
            last_model = Some(row.model.as_str());
            row.model.as_str()
        };
        let max_cell = if row.infinite_count > 0 && row.max.is_infinite() {
            any_infinite = true;
            "inf*".to_string()
        } else {
            fmt_sig(row.max)
        };
        out.push_str(&format!(
            "| {} | {} {} | {} | {} | {} |\n",
            model_cell,
            row.metric.name(),
            row.metric.arrow(),
            fmt_sig(row.mean),
            max_cell,
            fmt_sig(row.min)
        ));
    }
    if any_infinite {
        out.push_str("\n\\* identical-image PSNR sentinels are excluded from the mean.\n");
    }
    out
}

/// Per-record CSV (`object_id,model,metric,value`); the `report` subcommand
/// re-aggregates these files.
pub fn write_records_csv(records: &[MetricRecord]) -> String {
    let mut out = String::from("object_id,model,metric,value\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.object_id,
            r.model,
            r.metric.name(),
            r.value
        ));
    }
    out
}

pub fn parse_records_csv(text: &str) -> Result<Vec<MetricRecord>, HarnessError> {
    let bad = |line_no: usize, why: &str| {
        HarnessError::Config(format!("records csv line {line_no}: {why}"))
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "object_id,model,metric,value" => {}
        _ => return Err(bad(1, "expected header object_id,model,metric,value")),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad(line_no, "expected 4 comma-separated fields"));
        }
        let metric = MetricKind::parse(fields[2])
            .ok_or_else(|| bad(line_no, "unknown metric name"))?;
        let value: f64 = fields[3]
            .parse()
            .map_err(|_| bad(line_no, "bad value"))?;
        records.push(MetricRecord {
            object_id: fields[0].to_string(),
            model: fields[1].to_string(),
            metric,
            value,
        });
    }
    Ok(records)
}
