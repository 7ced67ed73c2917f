//! Core library of the forecasting workbench: ARIMA estimation, the
//! digit-token codec for language-model forecasting, completion providers,
//! synthetic signal generators, dataset handling and the benchmark runner.

pub mod arima;
pub mod bench;
pub mod codec;
pub mod data;
pub mod error;
pub mod forecaster;
pub mod llm;
pub mod series;
pub mod synth;

pub use error::{Error, Result};
pub use forecaster::{arima_forecast, llmtime_forecast, ForecastResult};
pub use series::{train_test_split, SplitSeries, TimeSeries};
