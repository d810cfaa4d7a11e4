//! Command-line front end: scenario generation, pre-learning, transfer
//! identification, optimizer comparison and report data.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 I/O failure,
//! 4 numerical failure of the load model.

mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use itq_load::baselines::{run_gwo, run_lm, run_pso, run_woa};
use itq_load::itq::{run_prelearn, ItqConfig};
use itq_load::model::PARAM_NAMES;
use itq_load::report::{self, RunRecord};
use itq_load::scenario::{builtin_scenario, synthesize_measurements, ScenarioSpec, DEFAULT_DT, DEFAULT_DURATION};
use itq_load::space::{self, build_grid};
use itq_load::transfer::{self, SourceTaskRecord, TransferMode};
use itq_load::{CompositeParams, Error, MeasurementSeries, OptimizationRunResult, Result};
use serde_json::{json, Value};

use config::{Config, Overrides, RunManifest};

#[derive(Parser)]
#[command(name = "itq-load", version, about = "Composite load model identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    WeightedSum,
    BestSource,
}

impl From<ModeArg> for TransferMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::WeightedSum => TransferMode::WeightedSum,
            ModeArg::BestSource => TransferMode::BestSource,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a measurement CSV from a built-in (S1..S5) or JSON scenario.
    Generate {
        /// Built-in name S1..S5, a ScenarioSpec JSON file, or a generate manifest.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        /// Seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Sampling step in seconds.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        noise_std: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cold-start learning on a series; stores the task in the library.
    Prelearn {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long, env = "ITQ_LIBRARY", default_value = "library")]
        library: PathBuf,
        /// Task name; defaults to the measurement file stem.
        #[arg(long)]
        name: Option<String>,
        /// Replace an existing task of the same name.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Identify a new series starting from knowledge transferred out of the library.
    Identify {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long, env = "ITQ_LIBRARY", default_value = "library")]
        library: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Repeated seeded runs of several optimizers on one series.
    Compare {
        #[arg(long)]
        measurements: PathBuf,
        /// Comma-separated subset of itq, itq-transfer, woa, gwo, pso, lm.
        #[arg(long, value_delimiter = ',', default_value = "itq,woa,gwo,pso,lm")]
        optimizers: Vec<String>,
        #[arg(long, default_value_t = 20)]
        runs: u64,
        /// Needed only for itq-transfer.
        #[arg(long, env = "ITQ_LIBRARY", default_value = "library")]
        library: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Run r uses seed `seed + r`.
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Plot-ready CSVs from a compare results file.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Series for the measured/estimated overlay.
        #[arg(long, requires = "params")]
        measurements: Option<PathBuf>,
        /// JSON with a 13-value `position` array (as written by identify) or a bare array.
        #[arg(long, requires = "measurements")]
        params: Option<PathBuf>,
    },
}

const OPTIMIZERS: [&str; 6] = ["itq", "itq-transfer", "woa", "gwo", "pso", "lm"];

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        e if e.is_numerical() => 4,
        _ => 2,
    }
}

fn load_series(path: &Path) -> Result<MeasurementSeries> {
    MeasurementSeries::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn params_json(position: &[f64]) -> Value {
    PARAM_NAMES.iter().zip(position).map(|(n, v)| (n.to_string(), json!(v))).collect::<serde_json::Map<_, _>>().into()
}

fn write_trace(run: &OptimizationRunResult, path: &Path) -> Result<()> {
    run.write_trace_csv(BufWriter::new(File::create(path)?))
}

fn resolve_scenario(arg: &str) -> Result<(ScenarioSpec, Option<f64>, Option<f64>)> {
    if let Some(s) = builtin_scenario(arg) {
        return Ok((s, None, None));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::InvalidInput(format!(
            "`{arg}` is neither a built-in scenario (S1..S5) nor an existing file"
        )));
    }
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::InvalidInput(format!("{arg}: {e}")))?;
    let (spec, duration, dt) = match v.get("command") {
        Some(_) => {
            let c = &v["config"];
            (c["scenario"].clone(), c["duration"].as_f64(), c["dt"].as_f64())
        }
        None => (v, None, None),
    };
    let spec: ScenarioSpec =
        serde_json::from_value(spec).map_err(|e| Error::InvalidInput(format!("{arg}: {e}")))?;
    Ok((spec, duration, dt))
}

fn generate(
    scenario: &str,
    out: &Path,
    duration: Option<f64>,
    dt: Option<f64>,
    noise_std: Option<f64>,
    seed: Option<u64>,
) -> Result<()> {
    let started = Instant::now();
    let (mut spec, m_duration, m_dt) = resolve_scenario(scenario)?;
    if let Some(n) = noise_std {
        spec.noise_std = n;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let duration = duration.or(m_duration).unwrap_or(DEFAULT_DURATION);
    let dt = dt.or(m_dt).unwrap_or(DEFAULT_DT);
    spec.validate()?;
    let series = synthesize_measurements(&spec, duration, dt)?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    series.save(out)?;
    let mut m = RunManifest::new("generate", json!({ "scenario": spec, "duration": duration, "dt": dt }), spec.seed);
    m.output(out);
    m.details = json!({ "samples": series.len(), "truth": params_json(&spec.truth.to_vector()) });
    m.write(&manifest_path(out), started)?;
    println!("wrote {} samples to {}", series.len(), out.display());
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn prelearn(
    measurements: &Path,
    library: &Path,
    name: Option<String>,
    force: bool,
    out_dir: &Path,
    cfg: &Config,
) -> Result<()> {
    let started = Instant::now();
    let series = load_series(measurements)?;
    let name = match name {
        Some(n) => n,
        None => measurements
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidInput("cannot derive a task name; pass --name".into()))?
            .to_string(),
    };
    if library.join(&name).exists() && !force {
        return Err(Error::TaskExists(name));
    }
    let grid = build_grid(cfg.bins)?;
    let run = run_prelearn(&series, &grid, &cfg.prelearn)?;
    let record = SourceTaskRecord::from_run(&name, &series, &grid, &cfg.prelearn, &run)?;
    let task_dir = transfer::save_task(library, &record, force)?;

    fs::create_dir_all(out_dir)?;
    let trace = out_dir.join("prelearn-trace.csv");
    write_trace(&run, &trace)?;
    let mut m = RunManifest::new("prelearn", serde_json::to_value(cfg)?, cfg.prelearn.seed);
    m.input("measurements", measurements).input("library", library);
    m.output(&task_dir).output(&trace);
    m.details = json!({
        "task": name,
        "best_fitness": run.best_fitness,
        "iterations": run.iterations,
        "best_params": params_json(&run.best_position),
    });
    m.write(&out_dir.join("prelearn-manifest.json"), started)?;
    println!(
        "task `{name}`: best fitness {:e} after {} iterations, stored in {}",
        run.best_fitness,
        run.iterations,
        task_dir.display()
    );
    Ok(())
}

fn identify(measurements: &Path, library_dir: &Path, out_dir: &Path, cfg: &Config) -> Result<()> {
    let started = Instant::now();
    let series = load_series(measurements)?;
    let library = transfer::load_library(library_dir)?;
    let grid = build_grid(cfg.bins)?;
    let outcome = transfer::run_transfer_identify(&series, &library, &grid, &cfg.transfer, &cfg.transfer_options())?;
    let run = &outcome.result;

    fs::create_dir_all(out_dir)?;
    let best = out_dir.join("identify-best.json");
    let sims = out_dir.join("identify-similarity.csv");
    let trace = out_dir.join("identify-trace.csv");
    let summary = json!({
        "algorithm": run.algorithm,
        "best_fitness": run.best_fitness,
        "iterations": run.iterations,
        "seed": run.seed,
        "mode": cfg.mode,
        "position": run.best_position,
        "params": params_json(&run.best_position),
        "contributors": outcome.contributors,
        "similarities": outcome.similarities,
    });
    fs::write(&best, serde_json::to_vec_pretty(&summary)?)?;
    transfer::write_similarity_csv(&outcome.similarities, BufWriter::new(File::create(&sims)?))?;
    write_trace(run, &trace)?;

    let mut m = RunManifest::new("identify", serde_json::to_value(cfg)?, cfg.transfer.seed);
    m.input("measurements", measurements).input("library", library_dir);
    m.output(&best).output(&sims).output(&trace);
    m.details = json!({ "mode": cfg.mode, "contributors": outcome.contributors });
    m.write(&out_dir.join("identify-manifest.json"), started)?;
    for s in &outcome.similarities {
        println!("similarity to `{}`: r = {:.4}", s.source, s.similarity.r);
    }
    println!("best fitness {:e} after {} iterations", run.best_fitness, run.iterations);
    Ok(())
}

fn compare(
    measurements: &Path,
    optimizers: &[String],
    runs: u64,
    library_dir: &Path,
    out_dir: &Path,
    cfg: &Config,
) -> Result<()> {
    let started = Instant::now();
    if let Some(bad) = optimizers.iter().find(|o| !OPTIMIZERS.contains(&o.as_str())) {
        return Err(Error::InvalidInput(format!(
            "unknown optimizer `{bad}`; valid names: {}",
            OPTIMIZERS.join(", ")
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidInput("--runs must be at least 1".into()));
    }
    let series = load_series(measurements)?;
    let grid = build_grid(cfg.bins)?;
    let bounds = grid.bounds();
    let library = if optimizers.iter().any(|o| o == "itq-transfer") {
        let lib = transfer::load_library(library_dir)?;
        if lib.is_empty() {
            return Err(Error::EmptyLibrary);
        }
        lib
    } else {
        vec![]
    };
    let objective = |x: &[f64]| space::fitness_of_vector(x, &series);
    let residual = |x: &[f64]| space::residuals(&CompositeParams::from_slice(x).ok()?, &series);

    let base_seed = cfg.prelearn.seed;
    let mut records = Vec::new();
    for name in optimizers {
        for r in 0..runs {
            let seed = base_seed + r;
            let bc = cfg.baseline.with_seed(seed);
            let run = match name.as_str() {
                "itq" => run_prelearn(&series, &grid, &cfg.prelearn.with_seed(seed))?,
                "itq-transfer" => {
                    let tc: ItqConfig = cfg.transfer.with_seed(seed);
                    transfer::run_transfer_identify(&series, &library, &grid, &tc, &cfg.transfer_options())?.result
                }
                "woa" => run_woa(&objective, &bounds, &bc)?,
                "gwo" => run_gwo(&objective, &bounds, &bc)?,
                "pso" => run_pso(&objective, &bounds, &bc)?,
                _ => run_lm(&residual, &bounds, None, &bc)?,
            };
            if let Some(w) = &run.warning {
                eprintln!("{name} seed {seed}: {w}");
            }
            records.push(RunRecord { optimizer: name.clone(), seed, trace: run.trace });
        }
    }

    fs::create_dir_all(out_dir)?;
    let results = out_dir.join("compare-results.csv");
    let summary_path = out_dir.join("compare-summary.csv");
    report::write_results_csv(&records, BufWriter::new(File::create(&results)?))?;
    let summary = report::summarize(&records)?;
    report::write_summary_csv(&summary, BufWriter::new(File::create(&summary_path)?))?;

    let mut m = RunManifest::new("compare", serde_json::to_value(cfg)?, base_seed);
    m.input("measurements", measurements);
    if !library.is_empty() {
        m.input("library", library_dir);
    }
    m.output(&results).output(&summary_path);
    m.details = json!({ "optimizers": optimizers, "runs": runs });
    m.write(&out_dir.join("compare-manifest.json"), started)?;
    for row in &summary {
        println!("{:<13} median final fitness {:e} over {} runs", row.optimizer, row.stats.median, row.runs);
    }
    Ok(())
}

fn read_position(path: &Path) -> Result<Vec<f64>> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let arr = v.get("position").unwrap_or(&v);
    serde_json::from_value(arr.clone())
        .map_err(|_| Error::InvalidInput(format!("{}: expected a `position` array of 13 numbers", path.display())))
}

fn report_cmd(results: &Path, out_dir: &Path, overlay: Option<(&Path, &Path)>) -> Result<()> {
    let started = Instant::now();
    let runs = report::read_results_csv(BufReader::new(File::open(results)?))?;
    fs::create_dir_all(out_dir)?;
    let conv = out_dir.join("convergence.csv");
    let boxes = out_dir.join("boxplot.csv");
    let summary = out_dir.join("summary.csv");
    report::write_convergence_csv(&runs, BufWriter::new(File::create(&conv)?))?;
    report::write_boxplot_csv(&runs, BufWriter::new(File::create(&boxes)?))?;
    report::write_summary_csv(&report::summarize(&runs)?, BufWriter::new(File::create(&summary)?))?;

    let mut m = RunManifest::new("report", Value::Null, 0);
    m.input("results", results);
    m.output(&conv).output(&boxes).output(&summary);
    if let Some((series_path, params_path)) = overlay {
        let series = load_series(series_path)?;
        let params = CompositeParams::from_slice(&read_position(params_path)?)?;
        let path = out_dir.join("overlay.csv");
        report::write_overlay_csv(&series, &params, BufWriter::new(File::create(&path)?))?;
        m.input("measurements", series_path).input("params", params_path);
        m.output(&path);
    }
    m.write(&out_dir.join("report-manifest.json"), started)?;
    println!("report data written to {}", out_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { scenario, out, duration, dt, noise_std, seed } => {
            generate(&scenario, &out, duration, dt, noise_std, seed)
        }
        Command::Prelearn { measurements, library, name, force, out_dir, overrides } => {
            prelearn(&measurements, &library, name, force, &out_dir, &Config::resolve(&overrides)?)
        }
        Command::Identify { measurements, library, mode, out_dir, overrides } => {
            let mut cfg = Config::resolve(&overrides)?;
            if let Some(m) = mode {
                cfg.mode = m.into();
            }
            identify(&measurements, &library, &out_dir, &cfg)
        }
        Command::Compare { measurements, optimizers, runs, library, out_dir, overrides } => {
            compare(&measurements, &optimizers, runs, &library, &out_dir, &Config::resolve(&overrides)?)
        }
        Command::Report { results, out_dir, measurements, params } => {
            report_cmd(&results, &out_dir, measurements.as_deref().zip(params.as_deref()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
