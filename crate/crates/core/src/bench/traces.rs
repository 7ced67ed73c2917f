//! Trace files: one CSV per (dataset, model) cell and one SVG overlay per
//! dataset. CSV is the canonical output; the SVG is a static convenience
//! chart built from plain polylines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::report::{ExperimentReport, Trace};

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 400.0;
const SVG_MARGIN: f64 = 45.0;
const ACTUAL_COLOR: &str = "#1f77b4";
const MODEL_COLORS: [&str; 5] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Replace anything outside `[A-Za-z0-9._-]` so names are safe file stems.
fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn trace_csv(trace: &Trace) -> String {
    let mut text = String::from("t,actual,predicted\n");
    for ((t, actual), predicted) in trace.t.iter().zip(&trace.actual).zip(&trace.predicted) {
        match predicted {
            Some(p) => writeln!(text, "{t:.16e},{actual:.16e},{p:.16e}"),
            None => writeln!(text, "{t:.16e},{actual:.16e},"),
        }
        .expect("string write");
    }
    text
}

struct Viewport {
    t_min: f64,
    t_span: f64,
    v_min: f64,
    v_span: f64,
}

impl Viewport {
    fn of(traces: &[&Trace]) -> Self {
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        let mut v_min = f64::INFINITY;
        let mut v_max = f64::NEG_INFINITY;
        for trace in traces {
            for &t in &trace.t {
                t_min = t_min.min(t);
                t_max = t_max.max(t);
            }
            for &v in &trace.actual {
                v_min = v_min.min(v);
                v_max = v_max.max(v);
            }
            for p in trace.predicted.iter().flatten() {
                v_min = v_min.min(*p);
                v_max = v_max.max(*p);
            }
        }
        // Pad vertically; guard degenerate (constant or empty) extents.
        let v_pad = 0.05 * (v_max - v_min);
        v_min -= v_pad;
        v_max += v_pad;
        let t_span = if t_max > t_min { t_max - t_min } else { 1.0 };
        let v_span = if v_max > v_min { v_max - v_min } else { 1.0 };
        if !t_min.is_finite() {
            t_min = 0.0;
        }
        if !v_min.is_finite() {
            v_min = 0.0;
        }
        Viewport {
            t_min,
            t_span,
            v_min,
            v_span,
        }
    }

    fn x(&self, t: f64) -> f64 {
        SVG_MARGIN + (t - self.t_min) / self.t_span * (SVG_WIDTH - 2.0 * SVG_MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        SVG_HEIGHT - SVG_MARGIN - (v - self.v_min) / self.v_span * (SVG_HEIGHT - 2.0 * SVG_MARGIN)
    }
}

fn polyline(points: &[(f64, f64)], color: &str, dashed: bool) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    let dash = if dashed {
        " stroke-dasharray=\"4 3\""
    } else {
        ""
    };
    format!(
        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

fn dataset_svg(dataset: &str, traces: &[&Trace]) -> String {
    let view = Viewport::of(traces);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" \
         viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">\n\
         \x20 <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         \x20 <text x=\"{SVG_MARGIN}\" y=\"20\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        xml_escape(dataset)
    );

    // Axis frame.
    svg.push_str(&format!(
        "  <rect x=\"{m:.2}\" y=\"{m:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"none\" stroke=\"#cccccc\"/>\n",
        m = SVG_MARGIN,
        w = SVG_WIDTH - 2.0 * SVG_MARGIN,
        h = SVG_HEIGHT - 2.0 * SVG_MARGIN,
    ));

    // Split marker at the first predicted point, if any.
    if let Some(first) = traces.iter().find_map(|trace| {
        trace
            .predicted
            .iter()
            .position(Option::is_some)
            .map(|i| trace.t[i])
    }) {
        let x = view.x(first);
        svg.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{m:.2}\" x2=\"{x:.2}\" y2=\"{b:.2}\" stroke=\"#999999\" stroke-dasharray=\"2 4\"/>\n",
            m = SVG_MARGIN,
            b = SVG_HEIGHT - SVG_MARGIN,
        ));
    }

    // Actual values, from the first trace (all traces of a dataset share
    // the same underlying series).
    if let Some(first) = traces.first() {
        let points: Vec<(f64, f64)> = first
            .t
            .iter()
            .zip(&first.actual)
            .map(|(&t, &v)| (view.x(t), view.y(v)))
            .collect();
        svg.push_str(&polyline(&points, ACTUAL_COLOR, false));
    }

    // One forecast polyline per model, over the predicted region only.
    let mut legend_y = 36.0;
    svg.push_str(&format!(
        "  <text x=\"{x:.2}\" y=\"{legend_y}\" font-family=\"monospace\" font-size=\"12\" fill=\"{ACTUAL_COLOR}\">actual</text>\n",
        x = SVG_MARGIN + 8.0,
    ));
    for (i, trace) in traces.iter().enumerate() {
        let color = MODEL_COLORS[i % MODEL_COLORS.len()];
        let points: Vec<(f64, f64)> = trace
            .t
            .iter()
            .zip(&trace.predicted)
            .filter_map(|(&t, p)| p.map(|v| (view.x(t), view.y(v))))
            .collect();
        if !points.is_empty() {
            svg.push_str(&polyline(&points, color, true));
        }
        legend_y += 14.0;
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{legend_y}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            xml_escape(&trace.model),
            x = SVG_MARGIN + 8.0,
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write per-cell trace CSVs and per-dataset SVG overlays into
/// `output_dir`, returning every path written. Reruns overwrite the same
/// paths with identical bytes for an identical report.
pub fn emit_traces(report: &ExperimentReport, output_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let mut written = Vec::new();

    for trace in &report.traces {
        let path = output_dir.join(format!(
            "{}__{}.csv",
            sanitize(&trace.dataset),
            sanitize(&trace.model)
        ));
        fs::write(&path, trace_csv(trace)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    let mut datasets: Vec<&str> = Vec::new();
    for trace in &report.traces {
        if !datasets.contains(&trace.dataset.as_str()) {
            datasets.push(&trace.dataset);
        }
    }
    for dataset in datasets {
        let group: Vec<&Trace> = report
            .traces
            .iter()
            .filter(|t| t.dataset == dataset)
            .collect();
        let path = output_dir.join(format!("{}.svg", sanitize(dataset)));
        fs::write(&path, dataset_svg(dataset, &group)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    Ok(written)
}
