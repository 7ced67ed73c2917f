//! Microbenchmarks for the paths the experiment runner leans on: residual
//! computation, model fitting, the digit-token codec and the synthetic
//! generators.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use forebench_core::arima::{self, ArimaOrder, FitOptions};
use forebench_core::codec;
use forebench_core::synth::{self, SynthKind, SynthSpec};
use forebench_core::TimeSeries;

fn ar2_series(n: usize) -> TimeSeries {
    let mut rng = forebench_core::synth::rng::SplitMix64::new(1234);
    let mut x = vec![0.0f64; n];
    for t in 2..n {
        x[t] = 0.5 * x[t - 1] - 0.3 * x[t - 2] + rng.next_gaussian();
    }
    TimeSeries::from_values(x).unwrap()
}

fn bench_css_residuals(c: &mut Criterion) {
    let series = ar2_series(2000);
    let phi = [0.5, -0.3];
    let theta = [0.4];
    c.bench_function("css_residuals/n=2000/arma(2,1)", |b| {
        b.iter(|| {
            arima::css_residuals(black_box(series.values()), 0.0, &phi, &theta).unwrap()
        })
    });
}

fn bench_fit(c: &mut Criterion) {
    let series = ar2_series(500);
    let options = FitOptions::default();
    c.bench_function("fit/n=500/arima(2,0,1)", |b| {
        b.iter(|| {
            arima::fit(
                black_box(&series),
                ArimaOrder::new(2, 0, 1).unwrap(),
                &options,
            )
            .unwrap()
        })
    });
}

fn bench_codec(c: &mut Criterion) {
    let series = synth::generate(&SynthSpec::over_default_range(
        SynthKind::AlmostPeriodic,
        0.1,
        500,
        9,
    ))
    .unwrap();
    let state = codec::fit_scaling(series.values(), Default::default()).unwrap();
    let encoded = codec::encode(series.values(), &state).unwrap();

    c.bench_function("encode/n=500", |b| {
        b.iter(|| codec::encode(black_box(series.values()), &state).unwrap())
    });
    c.bench_function("decode/n=500", |b| {
        b.iter(|| codec::decode(black_box(&encoded.text), &state, 500).unwrap())
    });
}

fn bench_generate(c: &mut Criterion) {
    let spec = SynthSpec::over_default_range(SynthKind::Sine, 0.2, 500, 3);
    c.bench_function("generate/sine/n=500", |b| {
        b.iter(|| synth::generate(black_box(&spec)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_css_residuals,
    bench_fit,
    bench_codec,
    bench_generate
);
criterion_main!(benches);
