//! `gptdf`: fit temporal features, generate data, and run fusion experiments.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gptdf_core::data::{generate_synthetic, load_csv, normalize, write_csv, ColumnSpec, CsvOptions, NormalizationMode};
use gptdf_core::edge::{run_simulation, Message, Scenario, SimulationResult, SourceSpec};
use gptdf_core::eval::{run_benchmark, BenchReport, Method};
use gptdf_core::fusion::{run_stream, EnsembleConfig, EnsembleState};
use gptdf_core::gp::{fit_hyperparameters, FitConfig, FitWarning};
use gptdf_core::par::Execution;
use gptdf_core::{Error, ErrorCategory, TemporalFeature, TimeSeries};
use serde::{Deserialize, Serialize};

/// Exit code when a run finished but some nodes or methods failed.
const EXIT_PARTIAL: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "gptdf", version, about = "Gaussian-process temporal data fusion")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for every random choice (data generation, optimizer restarts).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sliding window length.
    #[arg(long, global = true)]
    tau: Option<usize>,
    /// Forgetting factor in (0, 1).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Fuse at most this many imported features.
    #[arg(long, global = true)]
    limit: Option<usize>,
    /// CSV value column, by header name or zero-based index.
    #[arg(long, global = true)]
    column: Option<ColumnSpec>,
    /// Directory for result files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a temporal feature to one CSV series.
    Fit {
        input: PathBuf,
        /// Fit the series as-is instead of normalizing it first.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Draw a synthetic series from a Matern 5/2 GP.
    Generate {
        #[arg(long)]
        sigma_f: f64,
        #[arg(long)]
        sigma_l: f64,
        #[arg(long)]
        sigma_n: f64,
        #[arg(short = 'n', long)]
        n: usize,
    },
    /// Run a scenario of historical and target edge nodes.
    Simulate { scenario: PathBuf },
    /// Online fused prediction over a CSV stream.
    Predict {
        input: PathBuf,
        /// Feature as `sigma_f,sigma_l,sigma_n`. Repeatable.
        #[arg(long = "feature", value_parser = parse_feature)]
        features: Vec<TemporalFeature>,
        /// JSON file holding one feature or a list of them.
        #[arg(long)]
        features_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Normalization::Offline)]
        normalization: Normalization,
    },
    /// Compare methods on one stream and print the metrics table.
    Bench { config: PathBuf },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Normalization {
    Offline,
    Online,
    None,
}

impl From<Normalization> for NormalizationMode {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Offline => NormalizationMode::Offline,
            Normalization::Online => NormalizationMode::Online,
            Normalization::None => NormalizationMode::None,
        }
    }
}

fn parse_feature(s: &str) -> Result<TemporalFeature, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [f, l, n] => TemporalFeature::new(f, l, n).map_err(|e| e.to_string()),
        _ => Err("expected sigma_f,sigma_l,sigma_n".into()),
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Partial(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |source| {
        Failure::Core(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(io_error(path))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_error(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_error(path))?))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(io_error(path))
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    toml::from_str(&read_text(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())).into())
}

fn stdout_error(e: io::Error) -> Failure {
    Failure::Core(Error::Io {
        path: "<stdout>".into(),
        source: e,
    })
}

fn apply_ensemble(g: &Global, ensemble: &mut EnsembleConfig) {
    if let Some(tau) = g.tau {
        ensemble.tau = tau;
    }
    if let Some(alpha) = g.alpha {
        ensemble.alpha = alpha;
    }
}

fn load_series(path: &Path, g: &Global) -> CliResult<TimeSeries> {
    let options = CsvOptions {
        value_column: g.column.clone(),
        ..CsvOptions::default()
    };
    Ok(load_csv(path, &options)?.series)
}

fn override_column(source: &mut SourceSpec, g: &Global) {
    if let (SourceSpec::Csv { column, .. }, Some(c)) = (source, &g.column) {
        *column = Some(c.clone());
    }
}

#[derive(Serialize)]
struct FitOutput {
    sigma_f: f64,
    sigma_l: f64,
    sigma_n: f64,
    n_points: usize,
    log_likelihood: f64,
    normalized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<FitWarning>,
}

fn cmd_fit(g: &Global, input: &Path, raw: bool, restarts: Option<usize>) -> CliResult<()> {
    let series = load_series(input, g)?;
    let data = if raw { series.clone() } else { normalize(&series)?.0 };
    let mut config = FitConfig {
        seed: g.seed.unwrap_or(0),
        ..FitConfig::default()
    };
    if let Some(r) = restarts {
        config.restarts = r;
    }
    let outcome = fit_hyperparameters(&data, &config)?;
    let out = FitOutput {
        sigma_f: outcome.feature.sigma_f,
        sigma_l: outcome.feature.sigma_l,
        sigma_n: outcome.feature.sigma_n,
        n_points: series.len(),
        log_likelihood: outcome.log_likelihood,
        normalized: !raw,
        warning: outcome.warning,
    };
    if let Some(dir) = &g.out_dir {
        write_json_file(&dir.join("feature.json"), &out)?;
    }
    let text = serde_json::to_string(&out).map_err(|e| Error::Config(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn cmd_generate(g: &Global, sigma_f: f64, sigma_l: f64, sigma_n: f64, n: usize) -> CliResult<()> {
    let feature = TemporalFeature::new(sigma_f, sigma_l, sigma_n)?;
    let series = generate_synthetic(&feature, n, g.seed.unwrap_or(0))?;
    match &g.out_dir {
        Some(dir) => {
            let path = dir.join("synthetic.csv");
            write_csv(&series, create(&path)?)?;
            eprintln!("wrote {}", path.display());
        }
        None => write_csv(&series, io::stdout().lock())?,
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FeatureFile {
    One(FeatureFields),
    Many(Vec<FeatureFields>),
}

/// Anything with the three feature fields, e.g. the output of `gptdf fit`.
#[derive(Deserialize)]
struct FeatureFields {
    sigma_f: f64,
    sigma_l: f64,
    sigma_n: f64,
}

fn read_features(path: &Path) -> CliResult<Vec<TemporalFeature>> {
    let parsed: FeatureFile =
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let fields = match parsed {
        FeatureFile::One(f) => vec![f],
        FeatureFile::Many(v) => v,
    };
    fields
        .into_iter()
        .map(|f| TemporalFeature::new(f.sigma_f, f.sigma_l, f.sigma_n).map_err(Failure::from))
        .collect()
}

fn cmd_predict(
    g: &Global,
    input: &Path,
    mut features: Vec<TemporalFeature>,
    features_file: Option<&Path>,
    normalization: NormalizationMode,
) -> CliResult<()> {
    if let Some(path) = features_file {
        features.extend(read_features(path)?);
    }
    if let Some(limit) = g.limit {
        features.truncate(limit);
    }
    if features.is_empty() {
        eprintln!("no features given; using the default prior model");
        features.push(gptdf_core::edge::DEFAULT_PRIOR_FEATURE);
    }
    let series = load_series(input, g)?;
    let (stream, stats) = match normalization {
        NormalizationMode::Offline => {
            let (s, stats) = normalize(&series)?;
            (s, Some(stats))
        }
        NormalizationMode::Online => (gptdf_core::data::StreamNormalizer::normalize_series(&series), None),
        NormalizationMode::None => (series, None),
    };
    let mut ensemble = EnsembleConfig::default();
    apply_ensemble(g, &mut ensemble);
    let mut state = EnsembleState::from_features(&features, ensemble)?;
    let log = run_stream(&mut state, &stream)?;
    let report = BenchReport::from_runs(vec![("GPTDF".into(), Ok(log))], &stream, stats.as_ref())?;
    let row = &report.rows[0];
    eprintln!(
        "nll {:.4}  mae {:.4}  mse {:.4}  delay {}  models {}",
        row.nll,
        row.mae,
        row.mse,
        row.delay,
        features.len()
    );
    match &g.out_dir {
        Some(dir) => {
            report.write_series_csv(0, create(&dir.join("predictions.csv"))?)?;
            report.write_csv(create(&dir.join("metrics.csv"))?)?;
        }
        None => report.write_series_csv(0, io::stdout().lock())?,
    }
    Ok(())
}

fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    s.split('-').filter(|p| !p.is_empty()).collect::<Vec<_>>().join("-")
}

fn write_report_files(dir: &Path, report: &BenchReport) -> CliResult<()> {
    report.write_csv(create(&dir.join("metrics.csv"))?)?;
    report.write_json(create(&dir.join("metrics.json"))?)?;
    for (i, row) in report.rows.iter().enumerate() {
        if row.error.is_none() {
            report.write_series_csv(i, create(&dir.join(format!("series-{i}-{}.csv", slug(&row.method))))?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    scenario: &'a Scenario,
    nodes: &'a [gptdf_core::edge::NodeOutcome],
    fused_features: Vec<&'a str>,
    used_default_prior: Option<bool>,
    traffic: &'a gptdf_core::edge::TrafficStats,
    total_bytes: usize,
    errors: &'a [String],
}

fn write_simulation(dir: &Path, scenario: &Scenario, result: &SimulationResult) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        scenario,
        nodes: &result.nodes,
        fused_features: result
            .target
            .as_ref()
            .map(|t| t.features.iter().map(|r| r.source_id.as_str()).collect())
            .unwrap_or_default(),
        used_default_prior: result.target.as_ref().map(|t| t.used_default_prior),
        traffic: &result.traffic,
        total_bytes: result.traffic.total_bytes(),
        errors: &result.errors,
    };
    write_json_file(&dir.join("manifest.json"), &manifest)?;

    let path = dir.join("registry.jsonl");
    let mut out = create(&path)?;
    for record in &result.registry {
        writeln!(out, "{}", Message::report(record).encode()).map_err(io_error(&path))?;
    }
    out.flush().map_err(io_error(&path))?;

    let path = dir.join("transcript.jsonl");
    let mut out = create(&path)?;
    for line in &result.transcript {
        writeln!(out, "{line}").map_err(io_error(&path))?;
    }
    out.flush().map_err(io_error(&path))?;

    if let Some(report) = &result.report {
        write_report_files(dir, report)?;
    }
    Ok(())
}

fn cmd_simulate(g: &Global, path: &Path) -> CliResult<()> {
    let mut scenario: Scenario = parse_toml(path)?;
    scenario.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    if let Some(seed) = g.seed {
        scenario.seed = seed;
    }
    if let Some(limit) = g.limit {
        scenario.limit = Some(limit);
    }
    apply_ensemble(g, &mut scenario.ensemble);
    for node in scenario.historical.iter_mut().chain(scenario.target.iter_mut()) {
        override_column(&mut node.source, g);
    }

    let result = run_simulation(&scenario)?;
    let dir = g.out_dir.clone().unwrap_or_else(|| PathBuf::from("gptdf-out"));
    write_simulation(&dir, &scenario, &result)?;
    if let Some(report) = &result.report {
        report.write_csv(io::stdout().lock())?;
    }
    eprintln!(
        "{} nodes, {} records in registry, {} bytes exchanged, results in {}",
        result.nodes.len(),
        result.registry.len(),
        result.traffic.total_bytes(),
        dir.display()
    );
    if result.is_complete() {
        Ok(())
    } else {
        Err(Failure::Partial(result.errors.join("\n")))
    }
}

#[derive(Deserialize, Serialize, Debug)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    data: SourceSpec,
    #[serde(default)]
    methods: Vec<Method>,
    #[serde(default)]
    fit: FitConfig,
    #[serde(default)]
    ensemble: EnsembleConfig,
    #[serde(default)]
    normalization: NormalizationMode,
    #[serde(default)]
    execution: Execution,
    /// Report metrics in the units of the input rather than normalized units.
    #[serde(default)]
    original_scale: bool,
}

fn cmd_bench(g: &Global, path: &Path) -> CliResult<()> {
    let mut config: BenchConfig = parse_toml(path)?;
    if config.methods.is_empty() {
        return Err(Error::Config(format!("{}: no methods to benchmark", path.display())).into());
    }
    if let SourceSpec::Csv { path: p, .. } = &mut config.data {
        if p.is_relative() {
            *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
        }
    }
    override_column(&mut config.data, g);
    apply_ensemble(g, &mut config.ensemble);
    if let Some(seed) = g.seed {
        config.fit.seed = seed;
    }
    if let Some(limit) = g.limit {
        for m in &mut config.methods {
            if let Method::Gptdf { features, .. } = m {
                features.truncate(limit);
            }
        }
    }
    let series = config
        .data
        .load(g.seed.unwrap_or(0))?
        .ok_or_else(|| Error::Config("bench data must be a csv or synthetic source".into()))?;
    let (stream, stats) = match config.normalization {
        NormalizationMode::Offline => {
            let (s, stats) = normalize(&series)?;
            (s, Some(stats))
        }
        NormalizationMode::Online => (gptdf_core::data::StreamNormalizer::normalize_series(&series), None),
        NormalizationMode::None => (series, None),
    };
    let scale = stats.as_ref().filter(|_| config.original_scale);
    let report = run_benchmark(
        &config.methods,
        &stream,
        &config.fit,
        &config.ensemble,
        config.execution,
        scale,
    )?;
    report.write_csv(io::stdout().lock())?;
    io::stdout().flush().map_err(stdout_error)?;
    if let Some(dir) = &g.out_dir {
        write_report_files(dir, &report)?;
    }
    if report.has_errors() {
        let errors: Vec<String> = report
            .rows
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.method)))
            .collect();
        return Err(Failure::Partial(errors.join("\n")));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Fit { input, raw, restarts } => cmd_fit(g, input, *raw, *restarts),
        Command::Generate {
            sigma_f,
            sigma_l,
            sigma_n,
            n,
        } => cmd_generate(g, *sigma_f, *sigma_l, *sigma_n, *n),
        Command::Simulate { scenario } => cmd_simulate(g, scenario),
        Command::Predict {
            input,
            features,
            features_file,
            normalization,
        } => cmd_predict(
            g,
            input,
            features.clone(),
            features_file.as_deref(),
            (*normalization).into(),
        ),
        Command::Bench { config } => cmd_bench(g, config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial(errors)) => {
            eprintln!("finished with errors:\n{errors}");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Numerical => 4,
            })
        }
    }
}
