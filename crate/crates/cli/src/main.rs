use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use saxmine::harness::{
    load_input, run_bench, run_with_timeout, synth, write_csv, Algorithm, BenchOptions, DiscordStyle,
    Excursion, OutputFormat, RunConfig, SynthKind, SynthSpec,
};
use saxmine::{DistanceMode, Error};

#[derive(Parser)]
#[command(name = "saxmine", version, about = "SAX-based anomaly and motif mining for time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one detector on a CSV series and print a report.
    Detect(DetectArgs),
    /// Generate a synthetic series as CSV.
    Synth(SynthArgs),
    /// Time detectors on synthetic series of growing size.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// brute, hotsax, sequitur, chaosgame, mk, grammar-motif, tracking, approx-motif or mdl
    #[arg(long)]
    algo: String,
    #[arg(long)]
    input: PathBuf,
    /// Start from a JSON config (e.g. one echoed in an earlier report);
    /// flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    word: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    level: Option<usize>,
    /// Chaos Game detection window, in words.
    #[arg(long)]
    lead: Option<usize>,
    /// Chaos Game reference window, in words.
    #[arg(long)]
    lag: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    symbol_size: Option<usize>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    topk: Option<usize>,
    #[arg(long)]
    refs: Option<usize>,
    #[arg(long)]
    ksigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    distance: Option<Distance>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Include the Sequitur grammar in the report.
    #[arg(long)]
    dump_grammar: bool,
    /// Feed runs of identical SAX words to Sequitur as one token.
    #[arg(long)]
    collapse_runs: bool,
    /// Longest run of missing points to interpolate.
    #[arg(long)]
    max_gap: Option<usize>,
    /// Seconds a timestamp may go backwards before the file is rejected.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Record the elapsed time in the report.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Distance {
    Znorm,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SynthArgs {
    /// sine, square, noise, walk, planted-discord, planted-motif, step or weekly
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 2000)]
    len: usize,
    #[arg(long, default_value_t = 100)]
    period: usize,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    plant_at: Option<usize>,
    #[arg(long)]
    inverted: bool,
    #[arg(long, default_value_t = 20)]
    motif_len: usize,
    #[arg(long, default_value_t = 5)]
    plants: usize,
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long)]
    step_at: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    step_ratio: f64,
    /// Raised block as `at,len,height`.
    #[arg(long)]
    excursion: Option<String>,
    /// Epoch seconds of the first point; writes `timestamp,value` rows.
    #[arg(long)]
    start: Option<f64>,
    #[arg(long, default_value_t = 60.0)]
    step_seconds: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the ground truth as JSON (default: stderr).
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "43200,86400")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "sequitur,chaosgame,hotsax")]
    algos: Vec<String>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Repetitions of discord searches at the largest size.
    #[arg(long, default_value_t = 1)]
    slow_reps: usize,
    #[arg(long, default_value_t = 1800.0)]
    timeout_s: f64,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => detect(a),
        Command::Synth(a) => make_synth(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("saxmine: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) => 2,
        Error::Ingest { .. } => 3,
        Error::Timeout(_) => 4,
        _ => 1,
    }
}

fn config_err(m: impl std::fmt::Display) -> Error {
    Error::Config(m.to_string())
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn detect(a: DetectArgs) -> Result<(), Error> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            let bad = |e: serde_json::Error| config_err(format!("{}: {e}", p.display()));
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
            // a whole report works too: take its echoed config
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value::<RunConfig>(value).map_err(bad)?
        }
        None => RunConfig::default(),
    };
    cfg.algorithm = a.algo.parse::<Algorithm>()?;
    cfg.input = Some(a.input.display().to_string());
    cfg.output = a.output.as_ref().map(|p| p.display().to_string());
    macro_rules! set {
        ($($flag:ident => $field:ident),* $(,)?) => {
            $(if let Some(v) = a.$flag { cfg.$field = v; })*
        };
    }
    set!(
        alpha => alpha, word => word_size, window => window_size, level => level,
        lead => lead, lag => lag, stride => stride, rmin => r_min, r => r,
        symbol_size => symbol_size, scales => scales, k => k, topk => top_k,
        refs => num_refs, ksigma => k_sigma, seed => seed,
    );
    if let Some(d) = a.distance {
        cfg.distance = match d {
            Distance::Znorm => DistanceMode::ZNormalized,
            Distance::Raw => DistanceMode::Raw,
        };
    }
    if let Some(f) = a.format {
        cfg.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    cfg.dump_grammar |= a.dump_grammar;
    cfg.collapse_runs |= a.collapse_runs;
    cfg.timing |= a.timing;
    if let Some(g) = a.max_gap {
        cfg.ingest.max_gap = g;
    }
    if let Some(t) = a.tolerance {
        cfg.ingest.tolerance = t;
    }
    if a.timeout_s.is_some() {
        cfg.timeout_s = a.timeout_s;
    }
    // knob errors come before touching the input
    cfg.validate()?;

    let (series, meta) = load_input(&cfg)?;
    let report = run_with_timeout(&cfg, &series, meta)?;
    let mut out = open_output(&a.output)?;
    match cfg.format {
        OutputFormat::Json => writeln!(out, "{}", report.to_json()?)?,
        OutputFormat::Csv => report.write_plot_csv(&series, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn make_synth(a: SynthArgs) -> Result<(), Error> {
    let kind: SynthKind = serde_json::from_value(serde_json::Value::String(a.kind.clone()))
        .map_err(|_| config_err(format!("unknown synth kind {:?}", a.kind)))?;
    let excursion = match &a.excursion {
        None => None,
        Some(text) => {
            let parts: Vec<&str> = text.split(',').collect();
            let bad = || config_err(format!("excursion must be at,len,height; got {text:?}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            Some(Excursion {
                at: parts[0].trim().parse().map_err(|_| bad())?,
                len: parts[1].trim().parse().map_err(|_| bad())?,
                height: parts[2].trim().parse().map_err(|_| bad())?,
            })
        }
    };
    let spec = SynthSpec {
        kind,
        len: a.len,
        period: a.period,
        amplitude: a.amplitude,
        noise: a.noise,
        seed: a.seed,
        plant_at: a.plant_at,
        discord_style: if a.inverted { DiscordStyle::Inverted } else { DiscordStyle::Flat },
        motif_len: a.motif_len,
        plants: a.plants,
        jitter: a.jitter,
        step_at: a.step_at,
        step_ratio: a.step_ratio,
        excursion,
    };
    let generated = synth(&spec)?;
    let series = match a.start {
        Some(t0) => generated.series.with_timestamps(t0, a.step_seconds)?,
        None => generated.series,
    };
    let mut out = open_output(&a.output)?;
    write_csv(&series, &mut out)?;
    out.flush()?;

    let meta = serde_json::json!({ "spec": spec, "meta": generated.meta });
    let text = serde_json::to_string_pretty(&meta).map_err(config_err)?;
    match &a.meta {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Error> {
    let algorithms = a
        .algos
        .iter()
        .map(|s| s.trim().parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()?;
    if !(a.timeout_s > 0.0 && a.timeout_s.is_finite()) {
        return Err(config_err(format!("timeout must be positive, got {}", a.timeout_s)));
    }
    let mut opts = BenchOptions {
        sizes: a.sizes,
        algorithms,
        reps: a.reps,
        slow_reps: a.slow_reps,
        timeout: Some(Duration::from_secs_f64(a.timeout_s)),
        ..Default::default()
    };
    if let Some(w) = a.window {
        opts.base.window_size = w;
    }
    let report = run_bench(&opts).map_err(|e| match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    })?;
    let mut out = open_output(&a.output)?;
    report.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}
