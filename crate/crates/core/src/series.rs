//! Time-series container, train/test splitting, differencing and error metrics.
//!
//! `TimeSeries` is the currency every other module trades in. It is immutable
//! after construction and rejects non-finite values up front so the numerical
//! kernels downstream never have to check.

use crate::error::{Error, Result};

/// An ordered sequence of `(timestamp, value)` pairs.
///
/// Timestamps are strictly increasing but need not be equally spaced; the
/// estimation and encoding modules treat the values as an equally spaced
/// sequence and ignore the timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
    name: Option<String>,
}

impl TimeSeries {
    /// Build a series from explicit timestamps and values.
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>, name: Option<String>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "timestamp/value length mismatch: {} vs {}",
                timestamps.len(),
                values.len()
            )));
        }
        if timestamps.is_empty() {
            return Err(Error::InvalidArgument("empty series".into()));
        }
        if let Some(t) = timestamps.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite timestamp {t}")));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "timestamps not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {v} at index {i}"
            )));
        }
        Ok(TimeSeries {
            timestamps,
            values,
            name,
        })
    }

    /// Build a series over the index grid `0, 1, 2, ...`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let timestamps = (0..values.len()).map(|i| i as f64).collect();
        TimeSeries::new(timestamps, values, None)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// A chronological split of one series into a training and a test segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub train: TimeSeries,
    pub test: TimeSeries,
}

/// Split off the last `horizon` points as the test segment.
pub fn train_test_split(series: &TimeSeries, horizon: usize) -> Result<SplitSeries> {
    let n = series.len();
    if horizon == 0 || horizon >= n {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must satisfy 0 < horizon < {n}"
        )));
    }
    let cut = n - horizon;
    let train = TimeSeries::new(
        series.timestamps[..cut].to_vec(),
        series.values[..cut].to_vec(),
        series.name.clone(),
    )?;
    let test = TimeSeries::new(
        series.timestamps[cut..].to_vec(),
        series.values[cut..].to_vec(),
        series.name.clone(),
    )?;
    Ok(SplitSeries { train, test })
}

/// d-th order difference. Output length is `values.len() - d`.
pub fn difference(values: &[f64], d: usize) -> Result<Vec<f64>> {
    if values.len() <= d {
        return Err(Error::InvalidArgument(format!(
            "cannot difference {} values {d} times",
            values.len()
        )));
    }
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Invert `difference`. `seeds` holds the last `d` values, on the original
/// scale, of the segment immediately preceding the values being rebuilt.
///
/// `undifference(difference(x, d)?, &x[..d], d)` reproduces `x[d..]`.
pub fn undifference(diffs: &[f64], seeds: &[f64], d: usize) -> Result<Vec<f64>> {
    if seeds.len() != d {
        return Err(Error::InvalidArgument(format!(
            "need exactly {d} seed value(s), got {}",
            seeds.len()
        )));
    }
    if d == 0 {
        return Ok(diffs.to_vec());
    }
    // level_seed[k] = last element of the k-times differenced seed window,
    // i.e. the value that continues the k-th difference level.
    let mut level_seeds = Vec::with_capacity(d);
    let mut window = seeds.to_vec();
    for _ in 0..d {
        level_seeds.push(*window.last().expect("window nonempty"));
        window = window.windows(2).map(|w| w[1] - w[0]).collect();
    }
    // Integrate from the innermost difference level outward.
    let mut current = diffs.to_vec();
    for level in (0..d).rev() {
        let mut acc = level_seeds[level];
        for v in current.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(current)
}

/// Mean squared pointwise error.
pub fn mse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_metric_args(predicted, actual)?;
    let sum: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(sum / predicted.len() as f64)
}

/// Mean absolute pointwise error.
pub fn mae(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_metric_args(predicted, actual)?;
    let sum: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(sum / predicted.len() as f64)
}

fn check_metric_args(predicted: &[f64], actual: &[f64]) -> Result<()> {
    if predicted.len() != actual.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} predicted vs {} actual",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("empty metric input".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn construction_rejects_bad_input() {
        assert!(TimeSeries::new(vec![0.0], vec![1.0, 2.0], None).is_err());
        assert!(TimeSeries::new(vec![], vec![], None).is_err());
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![1.0, 2.0], None).is_err());
        assert!(TimeSeries::new(vec![1.0, 0.5], vec![1.0, 2.0], None).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, f64::NAN], None).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, f64::INFINITY], None).is_err());
        assert!(TimeSeries::new(vec![0.0, f64::NAN], vec![1.0, 2.0], None).is_err());
    }

    #[test]
    fn split_holds_last_horizon_points() {
        let s = TimeSeries::from_values((0..500).map(|i| i as f64).collect()).unwrap();
        let split = train_test_split(&s, 100).unwrap();
        assert_eq!(split.train.len(), 400);
        assert_eq!(split.test.len(), 100);
        assert_eq!(split.test.values()[0], 400.0);
    }

    #[test]
    fn split_tiny_series() {
        let s = TimeSeries::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        let split = train_test_split(&s, 1).unwrap();
        assert_eq!(split.train.values(), &[1.0, 2.0]);
        assert_eq!(split.test.values(), &[3.0]);
    }

    #[test]
    fn split_rejects_degenerate_horizons() {
        let s = TimeSeries::from_values(vec![1.0, 2.0]).unwrap();
        assert!(train_test_split(&s, 2).is_err());
        assert!(train_test_split(&s, 0).is_err());
        assert!(train_test_split(&s, 3).is_err());
    }

    #[test]
    fn difference_orders() {
        let x = [1.0, 3.0, 6.0, 10.0];
        assert_eq!(difference(&x, 1).unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(difference(&x, 2).unwrap(), vec![1.0, 1.0]);
        assert_eq!(difference(&x, 0).unwrap(), x.to_vec());
        assert!(difference(&x, 4).is_err());
    }

    #[test]
    fn undifference_from_seed() {
        let out = undifference(&[2.0, 3.0, 4.0], &[1.0], 1).unwrap();
        assert_eq!(out, vec![3.0, 6.0, 10.0]);
        let out = undifference(&[2.0, 3.0], &[], 0).unwrap();
        assert_eq!(out, vec![2.0, 3.0]);
        assert!(undifference(&[1.0], &[1.0], 2).is_err());
    }

    #[test]
    fn undifference_round_trip_second_order() {
        let x = [5.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let d = 2;
        let diffs = difference(&x, d).unwrap();
        let rebuilt = undifference(&diffs, &x[..d], d).unwrap();
        for (r, expect) in rebuilt.iter().zip(&x[d..]) {
            assert!((r - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn metric_values() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5);
        assert_eq!(mse(&[1.0, 2.0], &[3.0, 2.0]).unwrap(), 2.0);
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 3.5);
        assert_eq!(mae(&[1.0, 2.0], &[3.0, 2.0]).unwrap(), 1.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
        assert!(mae(&[1.0], &[]).is_err());
    }

    proptest! {
        #[test]
        fn split_concat_reconstructs(values in prop::collection::vec(-100.0f64..100.0, 2..60),
                                     frac in 0.01f64..0.99) {
            let n = values.len();
            let horizon = ((n as f64 * frac) as usize).clamp(1, n - 1);
            let s = TimeSeries::from_values(values.clone()).unwrap();
            let split = train_test_split(&s, horizon).unwrap();
            let mut glued = split.train.values().to_vec();
            glued.extend_from_slice(split.test.values());
            prop_assert_eq!(glued, values);
        }

        #[test]
        fn undifference_inverts_difference(values in prop::collection::vec(-50.0f64..50.0, 4..40),
                                           d in 0usize..3) {
            prop_assume!(values.len() > d);
            let diffs = difference(&values, d).unwrap();
            let rebuilt = undifference(&diffs, &values[..d], d).unwrap();
            for (r, expect) in rebuilt.iter().zip(&values[d..]) {
                let tol = 1e-9 * expect.abs().max(1.0);
                prop_assert!((r - expect).abs() <= tol);
            }
        }

        #[test]
        fn mse_symmetric_and_mae_bound(pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..50)) {
            let (p, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let m1 = mse(&p, &a).unwrap();
            let m2 = mse(&a, &p).unwrap();
            prop_assert_eq!(m1, m2);
            // Jensen: mean |e| <= sqrt(mean e^2)
            let b = mae(&p, &a).unwrap();
            prop_assert!(b <= m1.sqrt() + 1e-12);
            prop_assert_eq!(mse(&p, &p).unwrap(), 0.0);
        }
    }
}
