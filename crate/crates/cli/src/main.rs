//! Command-line front end: run experiments, poke at the codec, generate
//! synthetic fixtures.
//!
//! Exit codes: 0 on success, 2 on configuration and schema problems
//! (including usage errors), 1 on everything else.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use forebench_core::bench::{self, ModelKind};
use forebench_core::codec::{self, ScalingConfig, ScalingState};
use forebench_core::data;
use forebench_core::synth::{self, SynthKind, SynthSpec};
use forebench_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "forebench",
    version,
    about = "Forecasting workbench: ARIMA and language-model forecasts over a shared benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run(RunArgs),
    /// Scale values and render them as digit tokens.
    Encode(EncodeArgs),
    /// Parse digit tokens back into values.
    Decode(DecodeArgs),
    /// Generate a synthetic series and write it as CSV.
    GenSynth(GenSynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Restrict the run to one dataset name.
    #[arg(long)]
    only_dataset: Option<String>,
    /// Restrict the run to one model ("arima" or "llmtime").
    #[arg(long)]
    only_model: Option<String>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's completion cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Offset quantile of the fitted scaling.
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    /// Scale quantile of the fitted scaling.
    #[arg(long, default_value_t = 0.99)]
    alpha: f64,
    /// Decimal digits kept after scaling.
    #[arg(long, default_value_t = 2)]
    precision: usize,
    /// Skip fitting; encode with offset 0 and scale 1.
    #[arg(long)]
    identity: bool,
    /// Values to encode.
    #[arg(required = true, allow_negative_numbers = true)]
    values: Vec<f64>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Offset the encoder used.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    offset: f64,
    /// Scale the encoder used.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    scale: f64,
    /// Decimal digits the encoder kept.
    #[arg(long, default_value_t = 2)]
    precision: usize,
    /// Stop after this many values.
    #[arg(long, default_value_t = 1_000_000)]
    max_values: usize,
    /// Digit-token text, e.g. "1 0 0 , 2 0 0".
    text: String,
}

#[derive(Args)]
struct GenSynthArgs {
    /// Signal family: almost_periodic, sine or sine_trend.
    #[arg(long)]
    kind: String,
    /// Gaussian noise standard deviation.
    #[arg(long)]
    sigma: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn run_experiment(args: RunArgs) -> Result<()> {
    let mut config = bench::load_config(&args.config)?;
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    if let Some(cache) = args.cache {
        config.cache_dir = Some(cache);
    }
    let only_model = args
        .only_model
        .as_deref()
        .map(str::parse::<ModelKind>)
        .transpose()?;

    let report = bench::run_filtered(&config, args.only_dataset.as_deref(), only_model)?;
    let written = bench::write_report_files(&report, &config.output_dir)?;

    let table = bench::emit_table(&report)?;
    print!("{}", table.text);
    println!(
        "wrote {} files under {}",
        written.len(),
        config.output_dir.display()
    );
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} / {} failed: {}",
            row.dataset,
            row.model,
            row.error.as_deref().unwrap_or_default()
        );
    }
    Ok(())
}

fn encode(args: EncodeArgs) -> Result<()> {
    let config = ScalingConfig {
        alpha: args.alpha,
        beta: args.beta,
        precision: args.precision,
    };
    let state = if args.identity {
        ScalingState::identity(args.precision)
    } else {
        codec::fit_scaling(&args.values, config)?
    };
    let encoded = codec::encode(&args.values, &state)?;
    let out = serde_json::json!({
        "text": encoded.text,
        "offset": state.offset,
        "scale": state.scale,
        "precision": args.precision,
        "count": encoded.count,
    });
    println!("{out}");
    Ok(())
}

fn decode(args: DecodeArgs) -> Result<()> {
    if !(args.scale.is_finite() && args.scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive, got {}",
            args.scale
        )));
    }
    let state = ScalingState {
        offset: args.offset,
        scale: args.scale,
        config: ScalingConfig {
            alpha: 1.0,
            beta: 0.0,
            precision: args.precision,
        },
    };
    let values = codec::decode(&args.text, &state, args.max_values)?;
    for v in values {
        println!("{v}");
    }
    Ok(())
}

fn gen_synth(args: GenSynthArgs) -> Result<()> {
    let kind: SynthKind = args.kind.parse()?;
    let spec = SynthSpec::over_default_range(kind, args.sigma, args.n, args.seed);
    let series = synth::generate(&spec)?;
    data::write_csv(&series, &args.out)?;
    println!("wrote {} rows to {}", series.len(), args.out.display());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run_experiment(args),
        Command::Encode(args) => encode(args),
        Command::Decode(args) => decode(args),
        Command::GenSynth(args) => gen_synth(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
