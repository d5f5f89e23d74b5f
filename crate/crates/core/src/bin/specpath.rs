use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use specpath::baseline::fit_ridge_baseline;
use specpath::data_io::{load_csv, load_model, save_model, Dataset};
use specpath::interpret::{importance, render_expression};
use specpath::pipeline::{fit_dataset, Scores, SplitData};
use specpath::report::{capacity_curve, lambda_sweep, seed_sweep};
use specpath::{Error, FitConfig, Matrix, Result, SpectralModel};

#[derive(Parser)]
#[command(name = "specpath", version, about = "Spectral-path regression for tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Ridge,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Lambda,
    Seeds,
}

#[derive(Args, Clone)]
struct FitFlags {
    /// Split seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 512)]
    max_paths: usize,
    /// Comma-separated support sizes.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    k_set: Vec<usize>,
    /// Comma-separated ascending ridge penalties.
    #[arg(long, value_delimiter = ',', default_value = "1e-5,1e-4,1e-3,1e-2,1e-1")]
    lambda_grid: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    block_size: usize,
    #[arg(long, default_value_t = 3)]
    patience: usize,
    #[arg(long, default_value_t = 1e-4)]
    min_improvement: f64,
    /// Keep the first-iteration penalty instead of re-selecting it at the end.
    #[arg(long)]
    no_resweep: bool,
}

impl FitFlags {
    fn config(&self) -> FitConfig {
        FitConfig {
            sparsity_set: self.k_set.clone(),
            max_paths: self.max_paths,
            block_size: self.block_size,
            lambda_grid: self.lambda_grid.clone(),
            patience: self.patience,
            min_improvement: self.min_improvement,
            final_resweep: !self.no_resweep,
            seed: self.seed,
            ..FitConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split, fit and save a model plus its trace.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        /// Model JSON output.
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        /// Fit-trace JSON-lines output (defaults next to the model).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitFlags,
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Write predictions for every row of a CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Column to ignore if present (e.g. the target).
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a model against a labelled CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the fitted expansion, and feature importances if data is given.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 12)]
        top: usize,
    },
    /// Normalized analytic sensitivities over a CSV.
    Importance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: Option<String>,
        /// CSV of feature,importance.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Per-iteration trace, or the capacity curve when data is given.
    TraceReport {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Fit every dataset of a `name,path,target` manifest.
    Benchmark {
        /// Manifest CSV.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitFlags,
    },
    /// Penalty sweep at a fixed dictionary, or refits over seeds 0..9.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value = "lambda")]
        kind: SweepKind,
        /// Number of seeds for a seed sweep, starting at 0.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitFlags,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_err(path: Option<&Path>) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source: e,
    }
}

fn write_rows<T: Serialize>(rows: &[T], format: Format, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    let io = write_err(path);
    match format {
        Format::Csv | Format::Text => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(|e| Error::Data(e.to_string()))?;
            }
            w.flush().map_err(io)?;
        }
        Format::Json => {
            for r in rows {
                let line = serde_json::to_string(r).map_err(|e| Error::Data(e.to_string()))?;
                writeln!(out, "{line}").map_err(&io)?;
            }
        }
    }
    Ok(())
}

/// Feature matrix in the model's column order.
fn model_inputs(model: &SpectralModel, data: &Dataset) -> Result<Matrix> {
    if let Some(names) = &model.feature_names {
        return data.select_features(names);
    }
    if data.dim() != model.dim() {
        return Err(Error::Data(format!(
            "model has {} features but the data has {}",
            model.dim(),
            data.dim()
        )));
    }
    Ok(data.features.clone())
}

fn cmd_fit(
    data: &Path,
    target: &str,
    model_path: &Path,
    trace_path: Option<&Path>,
    flags: &FitFlags,
    baseline: Option<Baseline>,
    format: Format,
) -> Result<()> {
    let ds = load_csv(data, Some(target))?;
    let config = flags.config();
    if let Some(Baseline::Ridge) = baseline {
        let split = SplitData::new(&ds, config.seed)?;
        let m = fit_ridge_baseline(&split.x_train, &split.y_train, &split.x_val, &split.y_val, &config.lambda_grid)?;
        let s = |x: &Matrix, y: &[f64]| Scores::of(y, &m.predict(x)?);
        let report = json!({
            "model": "ridge",
            "lambda": m.lambda,
            "train_r2": s(&split.x_train, &split.y_train)?.r2,
            "val_r2": s(&split.x_val, &split.y_val)?.r2,
            "test_r2": s(&split.x_test, &split.y_test)?.r2,
            "test_nrmse": s(&split.x_test, &split.y_test)?.nrmse,
        });
        println!("{report}");
        return Ok(());
    }
    let o = fit_dataset(&ds, &config)?;
    save_model(&o.model, model_path)?;
    let trace_path = trace_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| model_path.with_extension("trace.jsonl"));
    write_rows(&o.model.fit_trace, Format::Json, Some(&trace_path))?;
    if ds.dropped_rows > 0 {
        eprintln!("dropped {} rows with missing values", ds.dropped_rows);
    }
    let summary = json!({
        "rows": ds.len(),
        "features": ds.dim(),
        "paths": o.model.num_paths(),
        "lambda_star": o.model.lambda_star,
        "train_r2": o.train.r2,
        "val_r2": o.val.r2,
        "test_r2": o.test.r2,
        "train_nrmse": o.train.nrmse,
        "val_nrmse": o.val.nrmse,
        "test_nrmse": o.test.nrmse,
        "seconds": o.seconds,
    });
    if format == Format::Text {
        println!(
            "paths {}  lambda {:e}  time {:.2}s",
            o.model.num_paths(),
            o.model.lambda_star,
            o.seconds
        );
        for (name, s) in [("train", o.train), ("val", o.val), ("test", o.test)] {
            println!("{name:<5} R2 {:.4}  NRMSE {:.4}", s.r2, s.nrmse);
        }
    } else {
        println!("{summary}");
    }
    Ok(())
}

fn cmd_predict(model: &Path, data: &Path, target: Option<&str>, out: Option<&Path>) -> Result<()> {
    let model = load_model(model)?;
    let ds = load_csv(data, target)?;
    let pred = model.predict_raw(&model_inputs(&model, &ds)?)?;
    let mut w = output(out)?;
    let io = write_err(out);
    writeln!(w, "prediction").map_err(&io)?;
    for p in pred {
        writeln!(w, "{p}").map_err(&io)?;
    }
    Ok(())
}

fn cmd_eval(model: &Path, data: &Path, target: &str, format: Format) -> Result<()> {
    let model = load_model(model)?;
    let ds = load_csv(data, Some(target))?;
    let pred = model.predict_raw(&model_inputs(&model, &ds)?)?;
    let s = Scores::of(&ds.target, &pred)?;
    match format {
        Format::Text => println!("R2 {:.6}  NRMSE {:.6}  rows {}", s.r2, s.nrmse, ds.len()),
        _ => println!("{}", json!({"rows": ds.len(), "r2": s.r2, "nrmse": s.nrmse})),
    }
    Ok(())
}

fn importance_rows(model: &SpectralModel, data: &Path, target: Option<&str>) -> Result<(Vec<(String, f64)>, bool)> {
    let ds = load_csv(data, target)?;
    let report = importance(model, &model_inputs(model, &ds)?)?;
    let rows = (0..model.dim())
        .map(|j| (model.feature_name(j), report.importance[j]))
        .collect();
    Ok((rows, report.degenerate))
}

fn cmd_explain(model: &Path, data: Option<&Path>, target: Option<&str>, top: usize) -> Result<()> {
    let model = load_model(model)?;
    println!("{}", render_expression(&model, top, None));
    if let Some(data) = data {
        let (rows, _) = importance_rows(&model, data, target)?;
        let obj: serde_json::Map<String, serde_json::Value> =
            rows.into_iter().map(|(n, v)| (n, json!(v))).collect();
        println!("{}", serde_json::Value::Object(obj));
    }
    Ok(())
}

fn cmd_importance(model: &Path, data: &Path, target: Option<&str>, out: Option<&Path>, format: Format) -> Result<()> {
    let model = load_model(model)?;
    let (rows, degenerate) = importance_rows(&model, data, target)?;
    if degenerate {
        eprintln!("model does not depend on any input; importances are uniform");
    }
    match format {
        Format::Text => {
            for (name, v) in &rows {
                println!("{name:<24} {:>8.3}%", 100.0 * v);
            }
        }
        Format::Json => {
            let obj: serde_json::Map<String, serde_json::Value> =
                rows.iter().map(|(n, v)| (n.clone(), json!(100.0 * v))).collect();
            println!("{}", serde_json::Value::Object(obj));
        }
        Format::Csv => {}
    }
    if out.is_some() || format == Format::Csv {
        #[derive(Serialize)]
        struct Row<'a> {
            feature: &'a str,
            importance: f64,
        }
        let rows: Vec<Row> = rows
            .iter()
            .map(|(n, v)| Row {
                feature: n,
                importance: *v,
            })
            .collect();
        write_rows(&rows, Format::Csv, out)?;
    }
    Ok(())
}

fn cmd_trace_report(
    model: &Path,
    data: Option<&Path>,
    target: Option<&str>,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<()> {
    let model = load_model(model)?;
    match data {
        None => write_rows(&model.fit_trace, format, out),
        Some(data) => {
            let target = target
                .map(str::to_owned)
                .or_else(|| model.target_name.clone())
                .ok_or_else(|| Error::Config("--target is required with --data".into()))?;
            let ds = load_csv(data, Some(&target))?;
            let ds = Dataset {
                features: model_inputs(&model, &ds)?,
                ..ds
            };
            let split = SplitData::new(&ds, seed)?;
            write_rows(&capacity_curve(&model, &split)?, format, out)
        }
    }
}

#[derive(Serialize)]
struct BenchRow {
    dataset: String,
    n: usize,
    d: usize,
    paths: usize,
    test_r2: f64,
    seconds: f64,
    error: String,
}

fn cmd_benchmark(manifest: &Path, out: Option<&Path>, flags: &FitFlags) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct Entry {
        name: String,
        path: PathBuf,
        target: String,
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest)
        .map_err(|e| Error::Data(format!("{}: {e}", manifest.display())))?;
    let entries: Vec<Entry> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Data(format!("{}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let config = flags.config();
    let rows: Vec<BenchRow> = entries
        .into_iter()
        .map(|e| {
            let path = if e.path.is_absolute() { e.path } else { base.join(e.path) };
            let fitted = load_csv(&path, Some(&e.target)).and_then(|ds| Ok((fit_dataset(&ds, &config)?, ds)));
            match fitted {
                Ok((o, ds)) => BenchRow {
                    dataset: e.name,
                    n: ds.len(),
                    d: ds.dim(),
                    paths: o.model.num_paths(),
                    test_r2: o.test.r2,
                    seconds: o.seconds,
                    error: String::new(),
                },
                Err(err) => BenchRow {
                    dataset: e.name,
                    n: 0,
                    d: 0,
                    paths: 0,
                    test_r2: f64::NAN,
                    seconds: 0.0,
                    error: err.to_string(),
                },
            }
        })
        .collect();
    write_rows(&rows, Format::Csv, out)
}

fn cmd_sweep(data: &Path, target: &str, kind: SweepKind, seeds: u64, out: Option<&Path>, flags: &FitFlags) -> Result<()> {
    let ds = load_csv(data, Some(target))?;
    let config = flags.config();
    match kind {
        SweepKind::Lambda => {
            let o = fit_dataset(&ds, &config)?;
            write_rows(&lambda_sweep(&o.model, &o.data, &config.lambda_grid)?, Format::Csv, out)
        }
        SweepKind::Seeds => {
            let seeds: Vec<u64> = (0..seeds).collect();
            write_rows(&seed_sweep(&ds, &config, &seeds), Format::Csv, out)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            data,
            target,
            model,
            out,
            fit,
            baseline,
            format,
        } => cmd_fit(&data, &target, &model, out.as_deref(), &fit, baseline, format),
        Command::Predict {
            model,
            data,
            target,
            out,
        } => cmd_predict(&model, &data, target.as_deref(), out.as_deref()),
        Command::Eval {
            model,
            data,
            target,
            format,
        } => cmd_eval(&model, &data, &target, format),
        Command::Explain {
            model,
            data,
            target,
            top,
        } => cmd_explain(&model, data.as_deref(), target.as_deref(), top),
        Command::Importance {
            model,
            data,
            target,
            out,
            format,
        } => cmd_importance(&model, &data, target.as_deref(), out.as_deref(), format),
        Command::TraceReport {
            model,
            data,
            target,
            seed,
            out,
            format,
        } => cmd_trace_report(&model, data.as_deref(), target.as_deref(), seed, out.as_deref(), format),
        Command::Benchmark { data, out, fit } => cmd_benchmark(&data, out.as_deref(), &fit),
        Command::Sweep {
            data,
            target,
            kind,
            seeds,
            out,
            fit,
        } => cmd_sweep(&data, &target, kind, seeds, out.as_deref(), &fit),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("SPECPATH_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
