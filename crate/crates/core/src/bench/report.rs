//! Report structure and table rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arima::ArimaSummary;
use crate::error::{Error, Result};

use super::ExperimentConfig;

/// Version of the report JSON layout, bumped on breaking changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Version of the trace CSV layout, bumped on breaking changes.
pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// One (dataset, model) cell of the experiment grid.
///
/// Metrics are absent when the run failed; the failure itself lands in
/// `error` so no attempt is ever silently dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub model: String,
    pub mse: Option<f64>,
    pub mae: Option<f64>,
    pub horizon: usize,
    pub model_label: Option<String>,
    /// Wall-clock duration of the cell. Measured but never serialized:
    /// reruns must produce byte-identical reports.
    #[serde(skip)]
    pub runtime_ms: u64,
    pub num_invalid: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Fitted-model record for ARIMA cells.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arima: Option<ArimaSummary>,
    /// Decoded sample paths for language-model cells, so both the samples
    /// and their median are on record.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<Vec<Vec<f64>>>,
}

/// Actual-vs-predicted sequence for one successful (dataset, model) cell.
///
/// Covers the whole series; `predicted` is `None` before the split point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub dataset: String,
    pub model: String,
    pub t: Vec<f64>,
    pub actual: Vec<f64>,
    pub predicted: Vec<Option<f64>>,
}

/// Everything one experiment run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Artifact and schema versions, e.g. "forebench-core 0.1.0; …".
    pub versions: String,
    /// The resolved configuration the run used.
    pub config_echo: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub traces: Vec<Trace>,
}

/// Plain-text and CSV renderings of the results grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRendering {
    pub text: String,
    pub csv: String,
}

/// Cell content for one model under one dataset.
struct Cell<'a> {
    row: Option<&'a ReportRow>,
}

impl Cell<'_> {
    fn mse(&self) -> Option<f64> {
        self.row.and_then(|r| r.mse)
    }

    fn mae(&self) -> Option<f64> {
        self.row.and_then(|r| r.mae)
    }
}

fn ordered_first_appearance<'a>(
    items: impl Iterator<Item = &'a str>,
) -> Vec<String> {
    let mut seen = Vec::new();
    for item in items {
        if !seen.iter().any(|s| s == item) {
            seen.push(item.to_string());
        }
    }
    seen
}

/// Render the results grid: datasets as rows, one MSE and MAE column per
/// model, the best (smallest) MSE per row flagged with `*` in the text
/// table and named in the CSV's `best_model` column. Failed cells render
/// as `ERR` in text and empty in CSV.
pub fn emit_table(report: &ExperimentReport) -> Result<TableRendering> {
    if report.rows.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot render a table from an empty report".into(),
        ));
    }

    let datasets = ordered_first_appearance(report.rows.iter().map(|r| r.dataset.as_str()));
    let models = ordered_first_appearance(report.rows.iter().map(|r| r.model.as_str()));

    let mut text_rows: Vec<Vec<String>> = Vec::new();
    let mut csv = String::new();

    // Header.
    let mut header = vec!["dataset".to_string(), "horizon".to_string()];
    for model in &models {
        header.push(format!("{model}_mse"));
        header.push(format!("{model}_mae"));
    }
    csv.push_str(&header.join(","));
    csv.push_str(",best_model\n");
    text_rows.push(header);

    for dataset in &datasets {
        let cells: Vec<Cell> = models
            .iter()
            .map(|model| Cell {
                row: report
                    .rows
                    .iter()
                    .find(|r| &r.dataset == dataset && &r.model == model),
            })
            .collect();
        let horizon = cells
            .iter()
            .filter_map(|c| c.row)
            .map(|r| r.horizon)
            .next()
            .unwrap_or(0);
        let best = cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.mse().map(|m| (i, m)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i);

        let mut text_row = vec![dataset.clone(), horizon.to_string()];
        let mut csv_row = vec![dataset.clone(), horizon.to_string()];
        for (i, cell) in cells.iter().enumerate() {
            let flag = if best == Some(i) { "*" } else { "" };
            match (cell.mse(), cell.mae()) {
                (Some(mse), Some(mae)) => {
                    text_row.push(format!("{mse:.6}{flag}"));
                    text_row.push(format!("{mae:.6}"));
                    csv_row.push(format!("{mse:.16e}"));
                    csv_row.push(format!("{mae:.16e}"));
                }
                _ => {
                    text_row.push("ERR".to_string());
                    text_row.push("ERR".to_string());
                    csv_row.push(String::new());
                    csv_row.push(String::new());
                }
            }
        }
        csv_row.push(best.map(|i| models[i].clone()).unwrap_or_default());
        csv.push_str(&csv_row.join(","));
        csv.push('\n');
        text_rows.push(text_row);
    }

    // Align the text rendering on column widths.
    let columns = text_rows[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| text_rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for (i, row) in text_rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        writeln!(text, "{}", line.join("  ").trim_end()).expect("string write");
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (columns - 1);
            writeln!(text, "{}", "-".repeat(total)).expect("string write");
        }
    }

    Ok(TableRendering { text, csv })
}
