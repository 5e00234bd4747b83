//! Command-line front end: generate benchmark streams, run experiments,
//! evaluate logs.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use driftseer::data::{export_csv, DriftSchedule, GeneratorKind, StreamSpec};
use driftseer::eval::{expand_preset, run_experiment, ExperimentConfig, Report, RunLog};

#[derive(Parser)]
#[command(
    name = "driftseer",
    about = "Semi-supervised concept drift detection toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic drift stream as CSV plus a schedule sidecar.
    Generate(GenerateArgs),
    /// Run an experiment (or a preset) and write reports and run logs.
    Run(RunArgs),
    /// Compute metrics for a run log against ground-truth drifts.
    Eval(EvalArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Stream generator: sine or sea.
    #[arg(long, value_parser = parse_generator)]
    dataset: GeneratorKind,
    /// Stream length.
    #[arg(long, default_value_t = 16_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drift schedule as index:concept pairs, e.g. 3000:1,10000:2.
    #[arg(long, default_value = "3000:1,10000:2")]
    drifts: String,
    /// Output CSV path; the schedule sidecar lands next to it.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// INI config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Named preset (see `run --list-presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: $DRIFTSEER_OUT_DIR or ./driftseer-out).
    #[arg(short, long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated seed list overriding the config.
    #[arg(long)]
    seeds: Option<String>,
    /// Config overrides as section.key=value; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Print the built-in defaults as INI and exit.
    #[arg(long)]
    print_defaults: bool,
    /// List preset names and exit.
    #[arg(long)]
    list_presets: bool,
    /// Skip writing per-seed log CSVs.
    #[arg(long)]
    no_logs: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Run log CSV produced by `run`.
    #[arg(long)]
    log: PathBuf,
    /// Ground-truth drifts: JSON array of indices or a schedule sidecar.
    #[arg(long)]
    gt: PathBuf,
    /// Matching horizon in points.
    #[arg(long)]
    horizon: Option<u64>,
}

enum CliError {
    /// Bad invocation or configuration: exit 2.
    Usage(String),
    /// Failure while doing the work: exit 1.
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_generator(value: &str) -> Result<GeneratorKind, String> {
    match GeneratorKind::by_name(value) {
        Ok(GeneratorKind::Csv) => Err("generate supports sine or sea".into()),
        Ok(kind) => Ok(kind),
        Err(e) => Err(e.to_string()),
    }
}

/// Write via a temp file and rename, so outputs are never half-written.
fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let schedule = parse_drift_arg(&args.drifts)?;
    let mut spec = StreamSpec::synthetic(args.dataset, args.n, args.seed);
    spec.schedule = schedule.clone();
    let points = spec
        .generate()
        .map_err(|e| CliError::usage(e.to_string()))?;

    // Output-path problems are invocation errors.
    let probe = std::fs::OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(false)
        .open(&args.out);
    if let Err(e) = probe {
        return Err(CliError::usage(format!(
            "cannot write '{}': {e}",
            args.out.display()
        )));
    }

    let mut csv = Vec::new();
    export_csv(&points, &schedule, &mut csv)
        .map_err(|e| CliError::runtime(format!("csv write failed: {e}")))?;
    write_atomic(&args.out, &csv)
        .map_err(|e| CliError::runtime(format!("cannot write '{}': {e}", args.out.display())))?;

    let sidecar = sidecar_path(&args.out);
    let schedule_json = serde_json::json!({
        "generator": args.dataset.as_str(),
        "n": args.n,
        "seed": args.seed,
        "drifts": schedule
            .changes()
            .iter()
            .map(|(index, concept)| serde_json::json!({"index": index, "concept": concept}))
            .collect::<Vec<_>>(),
    });
    write_atomic(
        &sidecar,
        serde_json::to_string_pretty(&schedule_json)
            .expect("schedule serializes")
            .as_bytes(),
    )
    .map_err(|e| CliError::runtime(format!("cannot write '{}': {e}", sidecar.display())))?;
    println!(
        "wrote {} ({} rows) and {}",
        args.out.display(),
        points.len(),
        sidecar.display()
    );
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("schedule.json")
}

fn parse_drift_arg(value: &str) -> Result<DriftSchedule, CliError> {
    if value.trim().is_empty() || value.trim() == "none" {
        return Ok(DriftSchedule::none());
    }
    let mut changes = Vec::new();
    for part in value.split(',') {
        let (index, concept) = part
            .trim()
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("drift '{part}' must be index:concept")))?;
        changes.push((
            index
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad drift index '{index}'")))?,
            concept
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad concept id '{concept}'")))?,
        ));
    }
    DriftSchedule::new(changes).map_err(|e| CliError::usage(e.to_string()))
}

fn out_dir(args: &RunArgs) -> PathBuf {
    args.out_dir.clone().unwrap_or_else(|| {
        std::env::var_os("DRIFTSEER_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("driftseer-out"))
    })
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    if args.print_defaults {
        print!("{}", config::to_ini(&config::defaults()));
        return Ok(());
    }
    if args.list_presets {
        for name in driftseer::eval::preset_names() {
            println!("{name}");
        }
        return Ok(());
    }

    let file_text = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config '{}': {e}", path.display()))
        })?),
        None => None,
    };
    let sets: Vec<(String, String)> = args
        .sets
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::usage(format!("override '{s}' must be KEY=VALUE")))
        })
        .collect::<Result<_, _>>()?;
    let resolved = config::resolve(file_text.as_deref(), &sets)
        .map_err(|errors| CliError::usage(errors.join("\n")))?;

    let seeds = match &args.seeds {
        Some(list) => config::parse_seeds(list).map_err(CliError::usage)?,
        None => config::parse_seeds(&resolved.map["experiment.seeds"]).map_err(CliError::usage)?,
    };

    let runs: Vec<ExperimentConfig> = match &args.preset {
        Some(preset) => {
            let base = config::build_config(&resolved, preset)
                .map_err(|errors| CliError::usage(errors.join("\n")))?;
            let mut runs = expand_preset(preset, base.stream.generator)
                .map_err(|e| CliError::usage(e.to_string()))?;
            for run in &mut runs {
                config::apply_explicit(run, &resolved)
                    .map_err(|errors| CliError::usage(errors.join("\n")))?;
            }
            runs
        }
        None => vec![config::build_config(&resolved, "run")
            .map_err(|errors| CliError::usage(errors.join("\n")))?],
    };

    let dir = out_dir(&args);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::usage(format!("cannot create '{}': {e}", dir.display())))?;

    let mut summary = vec![Report::SUMMARY_HEADER.to_string()];
    for cfg in &runs {
        let report =
            run_experiment(cfg, &seeds).map_err(|e| CliError::runtime(e.to_string()))?;
        summary.extend(report.summary_rows());

        if !args.no_logs {
            for seed_result in &report.seeds {
                let mut buf = Vec::new();
                seed_result
                    .log
                    .write_csv(&mut buf)
                    .map_err(|e| CliError::runtime(e.to_string()))?;
                let path = dir.join(format!("{}-seed{}.log.csv", cfg.name, seed_result.seed));
                write_atomic(&path, &buf).map_err(|e| CliError::runtime(e.to_string()))?;
            }
        }

        // The timestamp lives in exactly one field so everything else in the
        // report is byte-stable across reruns.
        let mut doc = serde_json::to_value(&report).expect("report serializes");
        doc.as_object_mut().expect("report is an object").insert(
            "generated_unix_ms".into(),
            serde_json::json!(now_unix_ms()),
        );
        let path = dir.join(format!("{}.report.json", cfg.name));
        write_atomic(
            &path,
            serde_json::to_string_pretty(&doc).expect("json").as_bytes(),
        )
        .map_err(|e| CliError::runtime(e.to_string()))?;
        let agg = &report.aggregate;
        println!(
            "{}: macc={:.2} precision={} recall={} lbl={:.3} -> {}",
            cfg.name,
            agg.macc,
            agg.precision
                .map_or_else(|| "na".to_string(), |p| format!("{p:.1}")),
            agg.recall
                .map_or_else(|| "na".to_string(), |r| format!("{r:.1}")),
            agg.lbl,
            path.display()
        );
    }
    let summary_path = dir.join("summary.csv");
    write_atomic(&summary_path, (summary.join("\n") + "\n").as_bytes())
        .map_err(|e| CliError::runtime(e.to_string()))?;
    println!("summary: {}", summary_path.display());
    Ok(())
}

fn now_unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let horizon = args.horizon.unwrap_or(2_000);
    let log_text = std::fs::read_to_string(&args.log)
        .map_err(|e| CliError::runtime(format!("cannot read '{}': {e}", args.log.display())))?;
    let log = RunLog::read_csv(&log_text).map_err(|e| CliError::runtime(e.to_string()))?;

    let gt_text = std::fs::read_to_string(&args.gt)
        .map_err(|e| CliError::runtime(format!("cannot read '{}': {e}", args.gt.display())))?;
    let gt = parse_gt(&gt_text).map_err(CliError::runtime)?;

    let metrics = driftseer::eval::compute_metrics(&log, &gt, horizon);
    let doc = serde_json::json!({
        "horizon": horizon,
        "gt_drifts": gt,
        "metrics": metrics,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("metrics serialize")
    );
    Ok(())
}

/// Accept either a bare JSON array of indices or a generate sidecar.
fn parse_gt(text: &str) -> Result<Vec<u64>, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("bad ground-truth JSON: {e}"))?;
    let as_index = |v: &serde_json::Value| -> Option<u64> { v.as_u64() };
    if let Some(list) = value.as_array() {
        return list
            .iter()
            .map(|v| as_index(v).ok_or_else(|| format!("bad drift index {v}")))
            .collect();
    }
    if let Some(drifts) = value.get("drifts").and_then(|d| d.as_array()) {
        return drifts
            .iter()
            .map(|d| {
                d.get("index")
                    .and_then(as_index)
                    .ok_or_else(|| format!("bad drift entry {d}"))
            })
            .collect();
    }
    Err("ground truth must be a JSON array of indices or a schedule sidecar".into())
}
