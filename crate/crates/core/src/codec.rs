//! Numeric serialization for language-model forecasting.
//!
//! A series is affinely rescaled (quantile offset and scale fitted on the
//! training split), each value is truncated to a fixed number of decimal
//! digits, and the digits are rendered space-separated with " , " between
//! values, e.g. `[0.789, 7.89] -> "7 8 , 7 8 9"` at precision 2. Decoding
//! inverts the rendering and the rescaling.
//!
//! Truncation operates on the value's shortest round-trip decimal
//! representation (what `{}` formatting prints), not on its exact binary
//! expansion. The float nearest 0.29 is 0.28999...; truncating that
//! expansion would emit "2 8" and decoding could never reproduce the value
//! it started from. Truncating the shortest representation keeps
//! decode-encode-decode an identity and still reproduces the documented
//! examples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantile scales at or below this are treated as degenerate.
pub const SCALE_EPSILON: f64 = 1e-12;
/// Token sequence placed between encoded values.
pub const VALUE_SEPARATOR: &str = " , ";
/// Separator between the digits of one value.
pub const DIGIT_SEPARATOR: &str = " ";
/// Token marking a negative value, emitted before its first digit.
pub const SIGN_TOKEN: &str = "-";

/// Quantile parameters of the rescaling and the digit budget.
///
/// `alpha` is the quantile of the offset-shifted training values that maps
/// to 1; `beta` is the quantile used as the offset; `precision` is the
/// number of decimal digits retained after scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    pub alpha: f64,
    pub beta: f64,
    pub precision: usize,
}

impl Default for ScalingConfig {
    /// Stock defaults used when tuning is disabled.
    fn default() -> Self {
        Self {
            alpha: 0.99,
            beta: 0.3,
            precision: 2,
        }
    }
}

impl ScalingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie in [0, 1), got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Default tuning grid: alpha in {0.5, 0.7, 0.9, 0.99} crossed with
    /// beta in {0, 0.15, 0.3}, all at the given precision.
    pub fn default_grid(precision: usize) -> Vec<Self> {
        let mut grid = Vec::with_capacity(12);
        for &alpha in &[0.5, 0.7, 0.9, 0.99] {
            for &beta in &[0.0, 0.15, 0.3] {
                grid.push(Self {
                    alpha,
                    beta,
                    precision,
                });
            }
        }
        grid
    }
}

/// A fitted rescaling: `scaled = (x - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingState {
    /// Empirical beta-quantile of the training values.
    pub offset: f64,
    /// Empirical alpha-quantile of (values - offset); 1 when degenerate.
    pub scale: f64,
    pub config: ScalingConfig,
}

impl ScalingState {
    /// No-op rescaling, useful for tests and raw-digit round trips.
    pub fn identity(precision: usize) -> Self {
        Self {
            offset: 0.0,
            scale: 1.0,
            config: ScalingConfig {
                alpha: 1.0,
                beta: 0.0,
                precision,
            },
        }
    }

    pub fn scale_value(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    pub fn unscale_value(&self, y: f64) -> f64 {
        y * self.scale + self.offset
    }
}

/// The rendered digit-token text for a sequence of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedSeries {
    pub text: String,
    pub state: ScalingState,
    /// Number of encoded values; equals the comma count in `text` plus one.
    pub count: usize,
}

/// Linear-interpolation empirical quantile over pre-sorted values.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fit the quantile rescaling on training values.
///
/// The offset is the beta-quantile of the values; the scale is the
/// alpha-quantile of the offset-shifted values (offset first, then the
/// scale quantile). A non-positive or near-zero scale quantile falls back
/// to 1 so constant and degenerate inputs stay encodable.
pub fn fit_scaling(train_values: &[f64], config: ScalingConfig) -> Result<ScalingState> {
    config.validate()?;
    if train_values.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot fit scaling on an empty series".into(),
        ));
    }
    if train_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "cannot fit scaling on non-finite values".into(),
        ));
    }
    let mut sorted = train_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let offset = quantile_sorted(&sorted, config.beta);
    let shifted: Vec<f64> = sorted.iter().map(|v| v - offset).collect();
    let raw_scale = quantile_sorted(&shifted, config.alpha);
    let scale = if raw_scale <= SCALE_EPSILON {
        1.0
    } else {
        raw_scale
    };
    Ok(ScalingState {
        offset,
        scale,
        config,
    })
}

/// Digit payload of one scaled value: sign and the decimal digits of the
/// truncation, without separators. `digits` is "0" for a zero payload and
/// carries no leading zeros otherwise.
fn digit_payload(scaled: f64, precision: usize) -> (bool, String) {
    // Clamp overflow from extreme value/scale combinations; deterministic
    // and documented rather than a panic.
    let clamped = if scaled.is_finite() {
        scaled
    } else if scaled > 0.0 {
        f64::MAX
    } else {
        -f64::MAX
    };
    let repr = format!("{}", clamped.abs());
    let (int_part, frac_part) = match repr.split_once('.') {
        Some((i, f)) => (i, f),
        None => (repr.as_str(), ""),
    };
    let mut combined = String::with_capacity(int_part.len() + precision);
    combined.push_str(int_part);
    combined.extend(frac_part.chars().take(precision));
    for _ in frac_part.len()..precision {
        combined.push('0');
    }
    let trimmed = combined.trim_start_matches('0');
    if trimmed.is_empty() {
        (false, "0".to_string())
    } else {
        (clamped < 0.0, trimmed.to_string())
    }
}

/// Render values as digit tokens under the given rescaling.
///
/// Each value is scaled, truncated toward zero to `precision` decimal
/// digits, and spelled as space-separated digits with the decimal point
/// dropped and any leading integer-part zero suppressed; values are joined
/// by `" , "` and negatives carry a leading `"- "` token.
pub fn encode(values: &[f64], state: &ScalingState) -> Result<EncodedSeries> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot encode an empty series".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "cannot encode non-finite values".into(),
        ));
    }
    let mut parts = Vec::with_capacity(values.len());
    for &v in values {
        let (negative, digits) = digit_payload(state.scale_value(v), state.config.precision);
        let mut rendered = String::with_capacity(2 * digits.len() + 2);
        if negative {
            rendered.push_str(SIGN_TOKEN);
            rendered.push_str(DIGIT_SEPARATOR);
        }
        for (i, ch) in digits.chars().enumerate() {
            if i > 0 {
                rendered.push_str(DIGIT_SEPARATOR);
            }
            rendered.push(ch);
        }
        parts.push(rendered);
    }
    Ok(EncodedSeries {
        text: parts.join(VALUE_SEPARATOR),
        state: *state,
        count: values.len(),
    })
}

/// The value `v` maps to after one trip through the codec: scale, truncate
/// to the precision grain, unscale. Useful as the exact expectation for
/// round-trip tests.
pub fn truncate_to_grain(v: f64, state: &ScalingState) -> f64 {
    let (negative, digits) = digit_payload(state.scale_value(v), state.config.precision);
    let magnitude: f64 = digits.parse().expect("digit-only payload");
    let signed = if negative { -magnitude } else { magnitude };
    state.unscale_value(signed / 10f64.powi(state.config.precision as i32))
}

/// Parse digit-token text back into values.
///
/// Whitespace-delimited tokens are consumed greedily left to right: single
/// digits extend the current value, `"-"` is accepted only before a value's
/// first digit, and `","` commits the value. Parsing stops at the first
/// token that violates the grammar (the interrupted value is discarded) or
/// once `max_values` values have been committed; a value still open at the
/// end of input is committed. An empty result is an error: the completion
/// contained nothing usable.
pub fn decode(text: &str, state: &ScalingState, max_values: usize) -> Result<Vec<f64>> {
    if max_values == 0 {
        return Err(Error::InvalidArgument(
            "max_values must be at least 1".into(),
        ));
    }
    let pow = 10f64.powi(state.config.precision as i32);
    let mut out: Vec<f64> = Vec::new();
    let mut digits = String::new();
    let mut negative = false;
    let mut violated = false;

    for token in text.split_whitespace() {
        if out.len() == max_values {
            break;
        }
        match token {
            "," if !digits.is_empty() => {
                let magnitude: f64 = digits.parse().expect("digit-only buffer");
                let signed = if negative { -magnitude } else { magnitude };
                out.push(state.unscale_value(signed / pow));
                digits.clear();
                negative = false;
            }
            t if t == SIGN_TOKEN && digits.is_empty() && !negative => {
                negative = true;
            }
            t if t.len() == 1 && t.as_bytes()[0].is_ascii_digit() => {
                digits.push_str(t);
            }
            _ => {
                violated = true;
                break;
            }
        }
    }
    if !violated && !digits.is_empty() && out.len() < max_values {
        let magnitude: f64 = digits.parse().expect("digit-only buffer");
        let signed = if negative { -magnitude } else { magnitude };
        out.push(state.unscale_value(signed / pow));
    }

    if out.is_empty() {
        return Err(Error::DecodeFailure(format!(
            "no parseable value in completion of {} chars",
            text.len()
        )));
    }
    Ok(out)
}

/// Pick the grid configuration with the highest score.
///
/// The scorer sees each candidate config plus the train and validation
/// splits and returns a higher-is-better score (a log-likelihood when the
/// provider exposes one, otherwise a documented proxy such as negative
/// validation MAE). Configs whose scorer errors or returns a non-finite
/// score are skipped; ties keep the earliest grid entry.
pub fn tune_scaling<F>(
    train: &[f64],
    validation: &[f64],
    grid: &[ScalingConfig],
    mut scorer: F,
) -> Result<ScalingConfig>
where
    F: FnMut(&ScalingConfig, &[f64], &[f64]) -> Result<f64>,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("tuning grid is empty".into()));
    }
    let mut best: Option<(f64, ScalingConfig)> = None;
    let mut failures = 0usize;
    for config in grid {
        match scorer(config, train, validation) {
            Ok(score) if score.is_finite() => {
                if best.as_ref().map_or(true, |(b, _)| score > *b) {
                    best = Some((score, *config));
                }
            }
            _ => failures += 1,
        }
    }
    best.map(|(_, config)| config).ok_or_else(|| {
        Error::TuningFailure(format!(
            "all {failures} grid configuration(s) failed to score"
        ))
    })
}
