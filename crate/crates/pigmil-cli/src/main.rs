//! Command-line interface: dataset generation, TPI detection, repeated
//! cross-validation, and sensitivity sweeps.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.

mod config_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config_file::ConfigFile;
use pigmil::bench::{
    cross_validate, detect_with_method, generate, sweep_d_ratio, sweep_noise, sweep_ws_size,
    tpi_accuracy, SynthKind, SynthSpec, TpiMethod,
};
use pigmil::data::{read_csv_file, write_csv_file};
use pigmil::{Error, PigmilConfig};

#[derive(Parser)]
#[command(name = "pigmil", version, about = "Multiple-instance learning via graph updating")]
struct Cli {
    /// Key-value config file mirroring the flags; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as bag-CSV.
    Gen(GenArgs),
    /// Detect true-positive instances and report their accuracy.
    Tpi(TpiArgs),
    /// Repeated stratified cross-validation of the full pipeline.
    Run(RunArgs),
    /// Sensitivity sweeps over noise, working-set size, or the
    /// discrimination ratio.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Dataset layout: basic, rhombus, or ring.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TpiArgs {
    /// Input bag-CSV path.
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// Detector: pigmil, kde-min, kde, or kde-max.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Working-set fraction of each positive bag.
    #[arg(long, value_name = "F")]
    ws_fraction: Option<f64>,
    /// Rejection threshold of the working-bag t-test.
    #[arg(long, value_name = "T")]
    t_threshold: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
    /// Also write the per-fold records as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "F")]
    ws_fraction: Option<f64>,
    #[arg(long, value_name = "T")]
    t_threshold: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// One of noise, ws-size, d-ratio.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
    /// Also write the sweep table as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Noise levels for mode=noise (comma separated).
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u8>>,
    /// Working-set fractions for mode=ws-size (comma separated).
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// Orders of magnitude for mode=d-ratio (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ratios: Option<Vec<f64>>,
    #[arg(long, value_name = "F")]
    ws_fraction: Option<f64>,
    #[arg(long, value_name = "T")]
    t_threshold: Option<f64>,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn report_and_code(self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            CliError::Lib(e) => {
                eprintln!("error: {e}");
                let code = match e {
                    Error::Solver { .. } => 3,
                    _ => 2,
                };
                ExitCode::from(code)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let file = match &cli.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(f) => f,
            Err(msg) => return CliError::Usage(msg).report_and_code(),
        },
        None => ConfigFile::empty(),
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args, &file),
        Command::Tpi(args) => cmd_tpi(args, &file),
        Command::Run(args) => cmd_run(args, &file),
        Command::Sweep(args) => cmd_sweep(args, &file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report_and_code(),
    }
}

fn merged<T: std::str::FromStr>(
    flag: Option<T>,
    file: &ConfigFile,
    key: &str,
) -> Result<Option<T>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get_parsed::<T>(key).map_err(CliError::usage)
}

fn merged_path(
    flag: Option<PathBuf>,
    file: &ConfigFile,
    key: &str,
) -> Result<Option<PathBuf>, CliError> {
    Ok(merged::<String>(flag.map(|p| p.to_string_lossy().into_owned()), file, key)?
        .map(PathBuf::from))
}

fn merged_bool(flag: bool, file: &ConfigFile, key: &str) -> Result<bool, CliError> {
    if flag {
        return Ok(true);
    }
    Ok(file.get_bool(key).map_err(CliError::usage)?.unwrap_or(false))
}

fn pipeline_config(
    ws_fraction: Option<f64>,
    t_threshold: Option<f64>,
    file: &ConfigFile,
) -> Result<PigmilConfig, CliError> {
    let mut cfg = PigmilConfig::default();
    if let Some(f) = merged(ws_fraction, file, "ws-fraction")? {
        cfg.ws_fraction = f;
    }
    if let Some(t) = merged(t_threshold, file, "t-threshold")? {
        cfg.t_threshold = t;
    }
    cfg.validate().map_err(CliError::Lib)?;
    Ok(cfg)
}

fn cmd_gen(args: GenArgs, file: &ConfigFile) -> Result<(), CliError> {
    let kind_name = merged(args.kind, file, "kind")?
        .ok_or_else(|| CliError::usage("gen requires --kind (basic|rhombus|ring)"))?;
    let kind = SynthKind::parse(&kind_name)
        .ok_or_else(|| CliError::usage(format!("unknown kind {kind_name:?}")))?;
    let seed = merged(args.seed, file, "seed")?.unwrap_or(0);
    let out = merged_path(args.out, file, "out")?
        .ok_or_else(|| CliError::usage("gen requires --out FILE"))?;
    let dataset = generate(&SynthSpec::new(kind, seed))?;
    write_csv_file(&dataset, &out)?;
    println!(
        "wrote {} dataset ({} bags, {} instances) to {}",
        kind.name(),
        dataset.bags.len(),
        dataset.n_instances(),
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TpiReport {
    method: &'static str,
    seed: u64,
    ws_fraction: f64,
    t_threshold: f64,
    tpi_accuracy: Option<f64>,
    pool: Vec<PoolEntry>,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct PoolEntry {
    bag_id: String,
    instance_index: usize,
}

fn cmd_tpi(args: TpiArgs, file: &ConfigFile) -> Result<(), CliError> {
    let data = merged_path(args.data, file, "data")?
        .ok_or_else(|| CliError::usage("tpi requires --data FILE"))?;
    let method_name =
        merged(args.method, file, "method")?.unwrap_or_else(|| "pigmil".to_string());
    let method = TpiMethod::parse(&method_name)
        .ok_or_else(|| CliError::usage(format!("unknown method {method_name:?}")))?;
    let seed = merged(args.seed, file, "seed")?.unwrap_or(0);
    let json = merged_bool(args.json, file, "json")?;
    let cfg = pipeline_config(args.ws_fraction, args.t_threshold, file)?;

    let dataset = read_csv_file(&data)?;
    let started = std::time::Instant::now();
    let pcp = detect_with_method(&dataset, method, &cfg, seed)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let has_truth = dataset.bags.iter().all(|b| b.truth.is_some());
    let accuracy = if has_truth {
        Some(tpi_accuracy(&pcp, &dataset)?)
    } else {
        None
    };
    let report = TpiReport {
        method: method.name(),
        seed,
        ws_fraction: cfg.ws_fraction,
        t_threshold: cfg.t_threshold,
        tpi_accuracy: accuracy,
        pool: pcp
            .entries
            .iter()
            .map(|e| PoolEntry {
                bag_id: e.bag_id.clone(),
                instance_index: e.instance_index,
            })
            .collect(),
        elapsed_ms,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("method:       {}", report.method);
        println!("seed:         {}", report.seed);
        match report.tpi_accuracy {
            Some(acc) => println!("tpi accuracy: {acc:.1}%"),
            None => println!("tpi accuracy: n/a (no ground truth)"),
        }
        println!("pool ({} entries):", report.pool.len());
        for entry in &report.pool {
            println!("  {} [{}]", entry.bag_id, entry.instance_index);
        }
    }
    Ok(())
}

fn cmd_run(args: RunArgs, file: &ConfigFile) -> Result<(), CliError> {
    let data = merged_path(args.data, file, "data")?
        .ok_or_else(|| CliError::usage("run requires --data FILE"))?;
    let folds = merged(args.folds, file, "folds")?.unwrap_or(10);
    let repeats = merged(args.repeats, file, "repeats")?.unwrap_or(5);
    let seed = merged(args.seed, file, "seed")?.unwrap_or(0);
    let json = merged_bool(args.json, file, "json")?;
    let csv_out = merged_path(args.csv, file, "csv")?;
    let cfg = pipeline_config(args.ws_fraction, args.t_threshold, file)?;

    let dataset = read_csv_file(&data)?;
    let report = cross_validate(&dataset, folds, repeats, &cfg, seed)?;
    if let Some(path) = csv_out {
        let mut text =
            String::from("repeat,fold,n_test_bags,bag_accuracy,tpi_accuracy,duration_ms\n");
        for r in &report.records {
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.repeat,
                r.fold,
                r.n_test_bags,
                r.bag_accuracy,
                r.tpi_accuracy.map_or(String::from("NA"), |v| v.to_string()),
                r.duration_ms
            ));
        }
        std::fs::write(&path, text).map_err(Error::Io)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!(
            "{}x{}-fold cross-validation (seed {seed})",
            report.repeats, report.folds
        );
        println!(
            "bag accuracy: {:.1}% +- {:.1}",
            report.bag_accuracy_mean, report.bag_accuracy_std
        );
        match (report.tpi_accuracy_mean, report.tpi_accuracy_std) {
            (Some(m), Some(s)) => println!("tpi accuracy: {m:.1}% +- {s:.1}"),
            _ => println!("tpi accuracy: n/a (no ground truth)"),
        }
        println!("total time:   {:.2}s", report.total_duration_ms / 1e3);
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepReport<'a> {
    mode: &'a str,
    seed: u64,
    rows: serde_json::Value,
}

fn cmd_sweep(args: SweepArgs, file: &ConfigFile) -> Result<(), CliError> {
    let mode = merged(args.mode, file, "mode")?
        .ok_or_else(|| CliError::usage("sweep requires --mode (noise|ws-size|d-ratio)"))?;
    let data = merged_path(args.data, file, "data")?
        .ok_or_else(|| CliError::usage("sweep requires --data FILE"))?;
    let seed = merged(args.seed, file, "seed")?.unwrap_or(0);
    let json = merged_bool(args.json, file, "json")?;
    let csv_out = merged_path(args.csv, file, "csv")?;
    let cfg = pipeline_config(args.ws_fraction, args.t_threshold, file)?;
    let dataset = read_csv_file(&data)?;

    let (rows_json, csv_text, human): (serde_json::Value, String, Vec<String>) = match mode
        .as_str()
    {
        "noise" => {
            let levels = match args.levels {
                Some(v) => v,
                None => file
                    .get_list("levels")
                    .map_err(CliError::usage)?
                    .map(|v| v.into_iter().map(|x| x as u8).collect())
                    .unwrap_or_else(|| (0..=5).collect()),
            };
            let rows = sweep_noise(&dataset, &levels, &cfg, seed)?;
            let mut csv = String::from("level,tpi_accuracy\n");
            let mut human = Vec::new();
            for r in &rows {
                csv.push_str(&format!("{},{}\n", r.level, r.tpi_accuracy));
                human.push(format!("level {}: {:.1}%", r.level, r.tpi_accuracy));
            }
            (serde_json::to_value(&rows).expect("serializable"), csv, human)
        }
        "ws-size" => {
            let fractions = match args.fractions {
                Some(v) => v,
                None => file
                    .get_list("fractions")
                    .map_err(CliError::usage)?
                    .unwrap_or_else(|| vec![0.2, 0.4, 0.6, 0.8]),
            };
            let rows = sweep_ws_size(&dataset, &fractions, &cfg, seed)?;
            let mut csv = String::from("fraction,tpi_accuracy\n");
            let mut human = Vec::new();
            for r in &rows {
                csv.push_str(&format!("{},{}\n", r.fraction, r.tpi_accuracy));
                human.push(format!("fraction {}: {:.1}%", r.fraction, r.tpi_accuracy));
            }
            (serde_json::to_value(&rows).expect("serializable"), csv, human)
        }
        "d-ratio" => {
            let ratios = match args.ratios {
                Some(v) => v,
                None => file
                    .get_list("ratios")
                    .map_err(CliError::usage)?
                    .unwrap_or_else(|| vec![-3.0, -2.0, -1.0, 0.0, 1.0]),
            };
            let rows = sweep_d_ratio(&dataset, &ratios, &cfg, seed)?;
            let mut csv = String::from("ratio,beta,tpi_accuracy\n");
            let mut human = Vec::new();
            for r in &rows {
                csv.push_str(&format!("{},{},{}\n", r.ratio, r.beta, r.tpi_accuracy));
                human.push(format!(
                    "ratio {:+}: {:.1}% (beta {:.3})",
                    r.ratio, r.tpi_accuracy, r.beta
                ));
            }
            (serde_json::to_value(&rows).expect("serializable"), csv, human)
        }
        other => return Err(CliError::usage(format!("unknown sweep mode {other:?}"))),
    };

    if let Some(path) = csv_out {
        std::fs::write(&path, csv_text).map_err(Error::Io)?;
    }
    if json {
        let report = SweepReport {
            mode: &mode,
            seed,
            rows: rows_json,
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("sweep mode {mode} (seed {seed})");
        for line in human {
            println!("  {line}");
        }
    }
    Ok(())
}
