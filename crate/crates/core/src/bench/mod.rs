//! Experiment runner: datasets × models, metrics, report and trace files.
//!
//! An experiment is described by one JSON [`ExperimentConfig`]. Each
//! dataset is split chronologically by its horizon, each selected model
//! forecasts the held-out segment, and the scored results land in an
//! [`ExperimentReport`]. Failures are data: a model blowing up on one
//! dataset becomes a row with an `error` field, never an aborted sweep.
//! With a warm completion cache and fixed seeds the whole pipeline is
//! deterministic, down to the bytes of the emitted files.

pub mod report;
pub mod traces;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::data::{self, DatasetEntry};
use crate::error::{Error, Result};
use crate::forecaster::{arima_forecast, llmtime_forecast, ArimaRunConfig, LlmtimeConfig};
use crate::llm::cache::CachedProvider;
use crate::llm::http::{HttpProvider, HttpProviderConfig, ReqwestTransport};
use crate::llm::mock::{MockBehavior, MockProvider};
use crate::llm::CompletionProvider;
use crate::series::{mae, mse, train_test_split, TimeSeries};
use crate::synth::{self, SynthKind, SynthSpec};

pub use report::{
    emit_table, ExperimentReport, ReportRow, TableRendering, Trace, REPORT_SCHEMA_VERSION,
    TRACE_SCHEMA_VERSION,
};
pub use traces::emit_traces;

const DEFAULT_SYNTH_POINTS: usize = 500;

fn default_n_points() -> usize {
    DEFAULT_SYNTH_POINTS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_seed() -> u64 {
    42
}

/// The two forecasters the runner knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Arima,
    Llmtime,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Arima => "arima",
            ModelKind::Llmtime => "llmtime",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arima" => Ok(ModelKind::Arima),
            "llmtime" => Ok(ModelKind::Llmtime),
            other => Err(Error::Config(format!(
                "unknown model {other:?}; expected \"arima\" or \"llmtime\""
            ))),
        }
    }
}

/// Where completions come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProviderConfig {
    /// Deterministic in-process provider; see [`MockBehavior`].
    Mock {
        #[serde(flatten)]
        behavior: MockBehavior,
    },
    /// Hosted completions API over HTTP.
    Http {
        #[serde(flatten)]
        http: HttpProviderConfig,
    },
}

impl Default for ProviderConfig {
    fn default() -> Self {
        // Repeat-the-last-value continuation: a naive but well-defined
        // offline default.
        ProviderConfig::Mock {
            behavior: MockBehavior::RepeatLastPeriod { period: 1 },
        }
    }
}

/// Language-model forecaster settings plus the provider that backs it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LlmtimeSection {
    #[serde(flatten)]
    pub config: LlmtimeConfig,
    #[serde(default)]
    pub provider: ProviderConfig,
}

/// A synthetic series declared inline in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDataset {
    /// Row name; defaults to "<kind>-sigma<sigma>".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: SynthKind,
    pub sigma: f64,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    /// Generator seed; defaults to the experiment seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

/// Marker distinguishing the sweep preset in an untagged dataset list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPreset {
    SigmaSweep,
}

/// Preset expanding into one synthetic dataset per noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSweep {
    pub preset: SweepPreset,
    pub kind: SynthKind,
    /// Noise grid; defaults to the kind's stock sigmas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<f64>>,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    /// Base seed; level i uses base + i. Defaults to the experiment seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

/// One item of the config's dataset list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSpec {
    /// `{"preset": "sigma_sweep", "kind": …}`
    Sweep(SigmaSweep),
    /// `{"name": …, "path": …}`: a CSV file on disk.
    File(DatasetEntry),
    /// `{"kind": …, "sigma": …}`: a generated series.
    Synth(SynthDataset),
}

/// Everything one experiment run needs, loadable from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub models: Vec<ModelKind>,
    #[serde(default)]
    pub llmtime: LlmtimeSection,
    #[serde(default)]
    pub arima: ArimaRunConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Completion cache directory; omit to call the provider directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config(
                "config must list at least one dataset".into(),
            ));
        }
        if self.models.is_empty() {
            return Err(Error::Config("config must list at least one model".into()));
        }
        for (i, model) in self.models.iter().enumerate() {
            if self.models[..i].contains(model) {
                return Err(Error::Config(format!(
                    "model {:?} listed twice",
                    model.label()
                )));
            }
        }
        if self.models.contains(&ModelKind::Llmtime) {
            self.llmtime.config.validate().map_err(|e| {
                Error::Config(format!("llmtime section invalid: {e}"))
            })?;
        }
        for spec in &self.datasets {
            match spec {
                DatasetSpec::Synth(s) => {
                    validate_synth_params(s.name.as_deref(), s.sigma, s.n_points)?
                }
                DatasetSpec::Sweep(s) => {
                    for sigma in s.sigmas.as_deref().unwrap_or(s.kind.preset_sigmas()) {
                        validate_synth_params(None, *sigma, s.n_points)?;
                    }
                }
                DatasetSpec::File(_) => {}
            }
        }
        Ok(())
    }
}

fn validate_synth_params(name: Option<&str>, sigma: f64, n_points: usize) -> Result<()> {
    let label = name.unwrap_or("synthetic dataset");
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Config(format!(
            "{label}: sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    if n_points < 2 {
        return Err(Error::Config(format!(
            "{label}: n_points must be at least 2, got {n_points}"
        )));
    }
    Ok(())
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// A dataset after name resolution, ready to split — or the error that
/// prevented loading it.
struct ResolvedDataset {
    name: String,
    declared_horizon: Option<usize>,
    loaded: Result<TimeSeries>,
}

fn synth_name(kind: SynthKind, sigma: f64) -> String {
    format!("{}-sigma{}", kind.label(), sigma)
}

fn resolve_datasets(config: &ExperimentConfig) -> Vec<ResolvedDataset> {
    let mut resolved = Vec::new();
    for spec in &config.datasets {
        match spec {
            DatasetSpec::File(entry) => resolved.push(ResolvedDataset {
                name: entry.name.clone(),
                declared_horizon: entry.horizon,
                loaded: data::load_csv(entry),
            }),
            DatasetSpec::Synth(s) => {
                let spec = SynthSpec {
                    kind: s.kind,
                    sigma: s.sigma,
                    n_points: s.n_points,
                    t_start: s.t_start.unwrap_or(0.0),
                    t_end: s.t_end.unwrap_or(8.0 * std::f64::consts::PI),
                    seed: s.seed.unwrap_or(config.seed),
                };
                resolved.push(ResolvedDataset {
                    name: s.name.clone().unwrap_or_else(|| synth_name(s.kind, s.sigma)),
                    declared_horizon: s.horizon,
                    loaded: synth::generate(&spec),
                });
            }
            DatasetSpec::Sweep(sweep) => {
                let sigmas = sweep
                    .sigmas
                    .clone()
                    .unwrap_or_else(|| sweep.kind.preset_sigmas().to_vec());
                let base_seed = sweep.seed.unwrap_or(config.seed);
                for (i, &sigma) in sigmas.iter().enumerate() {
                    let spec = SynthSpec::over_default_range(
                        sweep.kind,
                        sigma,
                        sweep.n_points,
                        base_seed.wrapping_add(i as u64),
                    );
                    resolved.push(ResolvedDataset {
                        name: synth_name(sweep.kind, sigma),
                        declared_horizon: sweep.horizon,
                        loaded: synth::generate(&spec),
                    });
                }
            }
        }
    }
    resolved
}

fn build_provider(config: &ExperimentConfig) -> Result<Box<dyn CompletionProvider>> {
    let base: Box<dyn CompletionProvider> = match &config.llmtime.provider {
        ProviderConfig::Mock { behavior } => Box::new(MockProvider::new(behavior.clone())),
        ProviderConfig::Http { http } => Box::new(HttpProvider::new(
            http.clone(),
            ReqwestTransport::new(Duration::from_secs(120))?,
        )?),
    };
    match &config.cache_dir {
        Some(dir) => Ok(Box::new(CachedProvider::new(base, dir)?)),
        None => Ok(base),
    }
}

fn failed_row(name: &str, model: ModelKind, horizon: usize, error: &Error) -> ReportRow {
    let num_invalid = match error {
        Error::ForecastFailure { num_invalid, .. } => *num_invalid,
        _ => 0,
    };
    ReportRow {
        dataset: name.to_string(),
        model: model.label().to_string(),
        mse: None,
        mae: None,
        horizon,
        model_label: None,
        runtime_ms: 0,
        num_invalid,
        error: Some(error.to_string()),
        arima: None,
        samples: None,
    }
}

/// Run every selected (dataset, model) cell and assemble the report.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_filtered(config, None, None)
}

/// [`run`] restricted to one dataset name and/or one model.
pub fn run_filtered(
    config: &ExperimentConfig,
    only_dataset: Option<&str>,
    only_model: Option<ModelKind>,
) -> Result<ExperimentReport> {
    config.validate()?;

    let mut datasets = resolve_datasets(config);
    for (i, d) in datasets.iter().enumerate() {
        if datasets[..i].iter().any(|other| other.name == d.name) {
            return Err(Error::Config(format!(
                "duplicate dataset name {:?}",
                d.name
            )));
        }
    }
    if let Some(filter) = only_dataset {
        datasets.retain(|d| d.name == filter);
        if datasets.is_empty() {
            return Err(Error::Config(format!(
                "no dataset named {filter:?} in the config"
            )));
        }
    }
    let models: Vec<ModelKind> = match only_model {
        Some(filter) => {
            if !config.models.contains(&filter) {
                return Err(Error::Config(format!(
                    "model {:?} not listed in the config",
                    filter.label()
                )));
            }
            vec![filter]
        }
        None => config.models.clone(),
    };

    let provider = if models.contains(&ModelKind::Llmtime) {
        Some(build_provider(config)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for dataset in &datasets {
        let series = match &dataset.loaded {
            Ok(series) => series,
            Err(error) => {
                let horizon = dataset.declared_horizon.unwrap_or(0);
                for &model in &models {
                    rows.push(failed_row(&dataset.name, model, horizon, error));
                }
                continue;
            }
        };
        let horizon = dataset
            .declared_horizon
            .unwrap_or_else(|| data::default_horizon(series.len()));
        let split = match train_test_split(series, horizon) {
            Ok(split) => split,
            Err(error) => {
                for &model in &models {
                    rows.push(failed_row(&dataset.name, model, horizon, &error));
                }
                continue;
            }
        };

        for &model in &models {
            let start = Instant::now();
            let outcome = match model {
                ModelKind::Arima => arima_forecast(&split.train, horizon, &config.arima),
                ModelKind::Llmtime => llmtime_forecast(
                    &split.train,
                    horizon,
                    &config.llmtime.config,
                    provider.as_ref().expect("provider built for llmtime"),
                ),
            };
            let runtime_ms = start.elapsed().as_millis() as u64;

            match outcome {
                Ok(result) => {
                    let row_mse = mse(&result.point, split.test.values());
                    let row_mae = mae(&result.point, split.test.values());
                    match (row_mse, row_mae) {
                        (Ok(row_mse), Ok(row_mae)) => {
                            let is_llm = model == ModelKind::Llmtime;
                            rows.push(ReportRow {
                                dataset: dataset.name.clone(),
                                model: model.label().to_string(),
                                mse: Some(row_mse),
                                mae: Some(row_mae),
                                horizon,
                                model_label: Some(result.model_label.clone()),
                                runtime_ms,
                                num_invalid: result.num_invalid,
                                error: None,
                                arima: result.arima.clone(),
                                samples: is_llm.then(|| result.samples.clone()),
                            });
                            let train_len = split.train.len();
                            let predicted = (0..series.len())
                                .map(|i| {
                                    if i >= train_len {
                                        Some(result.point[i - train_len])
                                    } else {
                                        None
                                    }
                                })
                                .collect();
                            traces.push(Trace {
                                dataset: dataset.name.clone(),
                                model: model.label().to_string(),
                                t: series.timestamps().to_vec(),
                                actual: series.values().to_vec(),
                                predicted,
                            });
                        }
                        (Err(error), _) | (_, Err(error)) => {
                            rows.push(failed_row(&dataset.name, model, horizon, &error));
                        }
                    }
                }
                Err(error) => rows.push(failed_row(&dataset.name, model, horizon, &error)),
            }
        }
    }

    if rows.iter().all(|r| r.error.is_some()) {
        let first = rows
            .iter()
            .find_map(|r| r.error.as_deref())
            .unwrap_or("no cells were attempted");
        return Err(Error::ExperimentFailure(format!(
            "all {} cells failed; first error: {first}",
            rows.len()
        )));
    }

    Ok(ExperimentReport {
        versions: format!(
            "forebench-core {}; report-schema {REPORT_SCHEMA_VERSION}; trace-schema {TRACE_SCHEMA_VERSION}",
            env!("CARGO_PKG_VERSION")
        ),
        config_echo: config.clone(),
        rows,
        traces,
    })
}

/// Write `report.json`, `table.txt`, `table.csv` and the trace files under
/// `out_dir`, returning every path written.
pub fn write_report_files(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let json_path = out_dir.join("report.json");
    let mut json =
        serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    json.push('\n');
    fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    written.push(json_path);

    let table = emit_table(report)?;
    let text_path = out_dir.join("table.txt");
    fs::write(&text_path, &table.text).map_err(|e| Error::io(&text_path, e))?;
    written.push(text_path);
    let csv_path = out_dir.join("table.csv");
    fs::write(&csv_path, &table.csv).map_err(|e| Error::io(&csv_path, e))?;
    written.push(csv_path);

    written.extend(emit_traces(report, &out_dir.join("traces"))?);
    Ok(written)
}
