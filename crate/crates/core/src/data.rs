//! CSV ingestion and the dataset registry.
//!
//! External series arrive as UTF-8 CSV files with a header row. A
//! [`DatasetEntry`] names the file, the value column and (optionally) the
//! time column and forecast horizon; [`load_csv`] turns it into a
//! [`TimeSeries`]. Row numbers in error messages are 1-based physical line
//! numbers, counting the header as line 1.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Cap on the default forecast horizon.
const MAX_DEFAULT_HORIZON: usize = 60;

/// What to do with a blank or NaN value cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Fail with a data error naming the offending row.
    #[default]
    Error,
    /// Repeat the previous row's value; fails if the first row is missing.
    ForwardFill,
    /// Skip the row entirely.
    Drop,
}

/// One named CSV-backed dataset in an experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    /// Forecast horizon; when absent, [`default_horizon`] of the loaded
    /// length applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_column: Option<String>,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
}

fn default_value_column() -> String {
    "v".to_string()
}

/// Default horizon for a series of `len` points: 20% of the length
/// (rounded up), capped at 60 and never below 1.
pub fn default_horizon(len: usize) -> usize {
    len.div_ceil(5).clamp(1, MAX_DEFAULT_HORIZON)
}

/// Is the cell missing (blank or an explicit NaN)?
fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("nan")
}

/// Days from the Unix epoch to an ISO-8601 calendar date.
fn epoch_days(date: chrono::NaiveDate) -> f64 {
    let epoch = chrono::NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch date");
    (date - epoch).num_days() as f64
}

fn parse_time_cell(cell: &str, line: u64, column: &str) -> Result<f64> {
    if let Ok(int) = cell.parse::<i64>() {
        return Ok(int as f64);
    }
    if let Ok(float) = cell.parse::<f64>() {
        if float.is_finite() {
            return Ok(float);
        }
    }
    if let Ok(date) = chrono::NaiveDate::parse_from_str(cell, "%Y-%m-%d") {
        return Ok(epoch_days(date));
    }
    Err(Error::Data(format!(
        "row {line}: cannot parse {column:?} value {cell:?} as an integer, \
         a real number or an ISO-8601 date"
    )))
}

fn column_index(headers: &csv::StringRecord, wanted: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == wanted)
        .ok_or_else(|| {
            Error::Schema(format!(
                "{}: no column named {wanted:?} in header [{}]",
                path.display(),
                headers
                    .iter()
                    .map(|h| format!("{:?}", h.trim()))
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
}

/// Load the series a [`DatasetEntry`] points at.
///
/// The value column must parse as real numbers; blank and NaN cells follow
/// the entry's [`MissingPolicy`]. The time column, when given, accepts
/// integers, real numbers, or ISO-8601 dates (mapped to days since the
/// epoch); without one, rows are numbered 0, 1, 2, … after any drops.
pub fn load_csv(entry: &DatasetEntry) -> Result<TimeSeries> {
    let file = fs::File::open(&entry.path).map_err(|e| Error::io(&entry.path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", entry.path.display())))?
        .clone();
    let value_idx = column_index(&headers, &entry.value_column, &entry.path)?;
    let time_idx = entry
        .time_column
        .as_deref()
        .map(|column| column_index(&headers, column, &entry.path))
        .transpose()?;

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", entry.path.display())))?;
        let line = record.position().map_or(0, |p| p.line());

        let cell = record.get(value_idx).unwrap_or("").trim();
        let value = if is_missing(cell) {
            match entry.missing_policy {
                MissingPolicy::Error => {
                    return Err(Error::Data(format!(
                        "row {line}: missing value in column {:?} (policy: error)",
                        entry.value_column
                    )));
                }
                MissingPolicy::ForwardFill => match values.last() {
                    Some(&previous) => previous,
                    None => {
                        return Err(Error::Data(format!(
                            "row {line}: missing value in column {:?} with nothing to \
                             forward-fill from",
                            entry.value_column
                        )));
                    }
                },
                MissingPolicy::Drop => continue,
            }
        } else {
            let parsed: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "row {line}: cannot parse {:?} value {cell:?} as a real number",
                    entry.value_column
                ))
            })?;
            if parsed.is_nan() {
                match entry.missing_policy {
                    MissingPolicy::Error => {
                        return Err(Error::Data(format!(
                            "row {line}: NaN value in column {:?} (policy: error)",
                            entry.value_column
                        )));
                    }
                    MissingPolicy::ForwardFill => match values.last() {
                        Some(&previous) => previous,
                        None => {
                            return Err(Error::Data(format!(
                                "row {line}: NaN value in column {:?} with nothing to \
                                 forward-fill from",
                                entry.value_column
                            )));
                        }
                    },
                    MissingPolicy::Drop => continue,
                }
            } else {
                parsed
            }
        };

        let timestamp = match time_idx {
            Some(idx) => {
                let cell = record.get(idx).unwrap_or("").trim();
                parse_time_cell(cell, line, entry.time_column.as_deref().unwrap_or("t"))?
            }
            None => timestamps.len() as f64,
        };
        timestamps.push(timestamp);
        values.push(value);
    }

    TimeSeries::new(timestamps, values, Some(entry.name.clone()))
        .map_err(|e| Error::Data(format!("{}: {e}", entry.path.display())))
}

/// Write a series as `t,v` CSV with 17 significant digits per cell, enough
/// to reparse every double exactly.
pub fn write_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    let mut text = String::from("t,v\n");
    for (t, v) in series.timestamps().iter().zip(series.values()) {
        writeln!(text, "{t:.16e},{v:.16e}").expect("writing to a String cannot fail");
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Validate a set of entries as a registry: unique names, positive horizons.
pub fn validate_registry(entries: &[DatasetEntry]) -> Result<()> {
    let mut seen = HashSet::new();
    for entry in entries {
        if !seen.insert(entry.name.as_str()) {
            return Err(Error::Config(format!(
                "duplicate dataset name {:?}",
                entry.name
            )));
        }
        if entry.horizon == Some(0) {
            return Err(Error::Config(format!(
                "dataset {:?}: horizon must be at least 1",
                entry.name
            )));
        }
        if entry.name.trim().is_empty() {
            return Err(Error::Config("dataset name must be nonempty".into()));
        }
    }
    Ok(())
}

/// Parse the `datasets` section of an experiment config file into the
/// CSV-backed entries it lists, skipping synthetic presets (objects without
/// a `path` key).
pub fn registry_from_config(config_path: &Path) -> Result<Vec<DatasetEntry>> {
    let text = fs::read_to_string(config_path).map_err(|e| Error::io(config_path, e))?;
    let document: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!("{}: invalid JSON: {e}", config_path.display()))
    })?;

    let mut entries = Vec::new();
    if let Some(datasets) = document.get("datasets") {
        let list = datasets.as_array().ok_or_else(|| {
            Error::Config(format!(
                "{}: \"datasets\" must be an array",
                config_path.display()
            ))
        })?;
        for item in list {
            if item.get("path").is_none() {
                continue;
            }
            let entry: DatasetEntry = serde_json::from_value(item.clone()).map_err(|e| {
                Error::Config(format!("{}: bad dataset entry: {e}", config_path.display()))
            })?;
            entries.push(entry);
        }
    }
    validate_registry(&entries)?;
    Ok(entries)
}
