//! The two forecasters the benchmark compares.
//!
//! The language-model path: fit the quantile scaling on the training split,
//! encode it as digit tokens, sample continuations from a completion
//! provider, decode each sample, and aggregate the valid ones pointwise by
//! the median. The ARIMA path wraps order selection, fitting and
//! forecasting into the same result shape so the benchmark treats both
//! uniformly.

use serde::{Deserialize, Serialize};

use crate::arima::{self, ArimaOrder, ArimaSummary, FitOptions};
use crate::codec::{self, ScalingConfig};
use crate::error::{Error, Result};
use crate::llm::{CompletionProvider, CompletionRequest};
use crate::series::TimeSeries;

/// Appended to the encoded history to cue the model into emitting the next
/// value: the separator that would precede it.
pub const PROMPT_CONTINUATION: &str = " ,";

/// Knobs of the language-model forecaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmtimeConfig {
    pub scaling: ScalingConfig,
    pub model_name: String,
    pub num_samples: usize,
    pub temperature: f64,
    /// Completion-token budget per forecast value. When absent it is
    /// derived from the encoded history: twice the average digit count
    /// plus two, covering one token per digit, per separator space and per
    /// comma under common tokenizers.
    pub tokens_per_value_estimate: Option<f64>,
    /// Multiplier on the token budget so slightly verbose samples still
    /// carry enough complete values.
    pub safety_factor: f64,
    /// Fewest decodable samples required to produce a forecast.
    pub min_valid_samples: usize,
    pub stop_sequences: Vec<String>,
}

impl Default for LlmtimeConfig {
    fn default() -> Self {
        Self {
            scaling: ScalingConfig::default(),
            model_name: "gpt-3.5-turbo-instruct".to_string(),
            num_samples: 10,
            temperature: 0.7,
            tokens_per_value_estimate: None,
            safety_factor: 1.3,
            min_valid_samples: 1,
            stop_sequences: Vec::new(),
        }
    }
}

impl LlmtimeConfig {
    pub fn validate(&self) -> Result<()> {
        self.scaling.validate()?;
        if self.num_samples == 0 {
            return Err(Error::InvalidArgument(
                "num_samples must be at least 1".into(),
            ));
        }
        if self.min_valid_samples == 0 || self.min_valid_samples > self.num_samples {
            return Err(Error::InvalidArgument(format!(
                "min_valid_samples must lie in 1..={}, got {}",
                self.num_samples, self.min_valid_samples
            )));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be finite and nonnegative, got {}",
                self.temperature
            )));
        }
        if !(self.safety_factor >= 1.0 && self.safety_factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "safety_factor must be at least 1, got {}",
                self.safety_factor
            )));
        }
        if let Some(t) = self.tokens_per_value_estimate {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "tokens_per_value_estimate must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// A point forecast plus the sample paths it was aggregated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    /// Pointwise median of the valid samples; length == horizon.
    pub point: Vec<f64>,
    /// Valid sample paths, each truncated to the horizon.
    pub samples: Vec<Vec<f64>>,
    /// Samples that failed to decode at least `horizon` values.
    pub num_invalid: usize,
    pub model_label: String,
    /// Fitted-model record when the forecast came from ARIMA.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arima: Option<ArimaSummary>,
}

fn median_of(mut column: Vec<f64>) -> f64 {
    column.sort_by(f64::total_cmp);
    let n = column.len();
    if n % 2 == 1 {
        column[n / 2]
    } else {
        (column[n / 2 - 1] + column[n / 2]) / 2.0
    }
}

/// Average digit count per encoded value.
fn average_digit_count(encoded_text: &str) -> f64 {
    let mut values = 0usize;
    let mut digits = 0usize;
    for value in encoded_text.split(codec::VALUE_SEPARATOR) {
        values += 1;
        digits += value
            .split(' ')
            .filter(|tok| *tok != codec::SIGN_TOKEN)
            .count();
    }
    digits as f64 / values.max(1) as f64
}

/// Forecast `horizon` values past the end of `train` by sampling a
/// completion model over the digit-token encoding.
pub fn llmtime_forecast(
    train: &TimeSeries,
    horizon: usize,
    config: &LlmtimeConfig,
    provider: &dyn CompletionProvider,
) -> Result<ForecastResult> {
    config.validate()?;
    if horizon == 0 {
        return Err(Error::InvalidArgument(
            "forecast horizon must be at least 1".into(),
        ));
    }

    let state = codec::fit_scaling(train.values(), config.scaling)?;
    let encoded = codec::encode(train.values(), &state)?;
    let prompt = format!("{}{}", encoded.text, PROMPT_CONTINUATION);

    let tokens_per_value = config
        .tokens_per_value_estimate
        .unwrap_or_else(|| 2.0 * average_digit_count(&encoded.text) + 2.0);
    let max_tokens =
        (horizon as f64 * tokens_per_value * config.safety_factor).ceil() as usize;

    let request = CompletionRequest {
        model_name: config.model_name.clone(),
        prompt,
        max_tokens: max_tokens.max(1),
        temperature: config.temperature,
        num_samples: config.num_samples,
        stop_sequences: config.stop_sequences.clone(),
        want_logprobs: false,
    };
    let batch = provider.complete(&request)?;

    let mut samples: Vec<Vec<f64>> = Vec::new();
    let mut num_invalid = 0usize;
    for text in &batch.texts {
        match codec::decode(text, &state, horizon) {
            Ok(values) if values.len() >= horizon => {
                samples.push(values[..horizon].to_vec());
            }
            _ => num_invalid += 1,
        }
    }
    if samples.len() < config.min_valid_samples {
        return Err(Error::ForecastFailure {
            num_invalid,
            num_samples: batch.texts.len(),
        });
    }

    let point = (0..horizon)
        .map(|i| median_of(samples.iter().map(|s| s[i]).collect()))
        .collect();
    Ok(ForecastResult {
        point,
        samples,
        num_invalid,
        model_label: format!("llmtime:{}", config.model_name),
        arima: None,
    })
}

/// ARIMA settings for one benchmark run: either a fixed order or the
/// bounds of the AIC selection grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArimaRunConfig {
    /// Fixed order; absent means select by AIC over the grid below.
    pub order: Option<ArimaOrder>,
    pub options: FitOptions,
    pub max_p: usize,
    pub max_d: usize,
    pub max_q: usize,
}

impl Default for ArimaRunConfig {
    fn default() -> Self {
        Self {
            order: None,
            options: FitOptions::default(),
            max_p: 5,
            max_d: 2,
            max_q: 2,
        }
    }
}

/// Fit an ARIMA model (selecting the order first unless one is fixed) and
/// forecast, shaped like a single-sample [`ForecastResult`].
pub fn arima_forecast(
    train: &TimeSeries,
    horizon: usize,
    config: &ArimaRunConfig,
) -> Result<ForecastResult> {
    let order = match config.order {
        Some(order) => order,
        None => arima::select_order(
            train,
            config.max_p,
            config.max_d,
            config.max_q,
            &config.options,
        )?,
    };
    let fitted = arima::fit(train, order, &config.options)?;
    let point = arima::forecast(&fitted, horizon)?;
    Ok(ForecastResult {
        samples: vec![point.clone()],
        point,
        num_invalid: 0,
        model_label: fitted.label(),
        arima: Some(fitted.summary()),
    })
}

/// Scorer for the codec tuning grid: negative validation MAE of the decoded
/// median forecast. A proxy for validation log-likelihood, used because the
/// providers here do not score externally chosen continuations; documented
/// as such.
pub fn mae_proxy_scorer<'a>(
    config: &'a LlmtimeConfig,
    provider: &'a dyn CompletionProvider,
) -> impl FnMut(&ScalingConfig, &[f64], &[f64]) -> Result<f64> + 'a {
    move |scaling, train, validation| {
        if validation.is_empty() {
            return Err(Error::InvalidArgument(
                "validation split is empty".into(),
            ));
        }
        let series = TimeSeries::from_values(train.to_vec())?;
        let mut candidate = config.clone();
        candidate.scaling = *scaling;
        let result = llmtime_forecast(&series, validation.len(), &candidate, provider)?;
        let mae = crate::series::mae(&result.point, validation)?;
        Ok(-mae)
    }
}
