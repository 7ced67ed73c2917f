//! The checked-in fixtures stay loadable: the CSV through the data module,
//! the JSON configs and the documented registry example through the bench
//! config schema.

use std::path::{Path, PathBuf};

use forebench_core::bench;
use forebench_core::data::{self, DatasetEntry, MissingPolicy};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn monthly_widgets_csv_loads_with_dates() {
    let entry = DatasetEntry {
        name: "monthly-widgets".into(),
        path: fixture("monthly_widgets.csv"),
        horizon: Some(6),
        value_column: "widgets".into(),
        time_column: Some("date".into()),
        missing_policy: MissingPolicy::Error,
    };
    let series = data::load_csv(&entry).unwrap();
    assert_eq!(series.len(), 24);
    assert_eq!(series.values()[0], 112.0);
    assert_eq!(series.values()[23], 140.0);
    // Dates map to epoch days, so consecutive months are 28-31 apart and
    // strictly increasing.
    let t = series.timestamps();
    for pair in t.windows(2) {
        let gap = pair[1] - pair[0];
        assert!((28.0..=31.0).contains(&gap), "month gap {gap}");
    }
}

#[test]
fn checked_in_configs_parse_and_validate() {
    for name in ["sigma_sweep.json", "synthetic_suite.json"] {
        bench::load_config(&fixture(name)).unwrap();
    }
}

#[test]
fn registry_example_parses_and_validates() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../datasets/registry.example.json");
    let config = bench::load_config(&path).unwrap();
    assert_eq!(config.datasets.len(), 8);
    let entries = data::registry_from_config(&path).unwrap();
    assert_eq!(entries.len(), 8);
    assert!(entries.iter().any(|e| e.name == "AirPassengers" && e.horizon == Some(29)));
}
