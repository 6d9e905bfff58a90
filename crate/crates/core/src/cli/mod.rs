//! The `featnet` command line: model, flatten, sample, compile, emit,
//! evaluate, report.

mod manifest;
mod report;

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::arch::{compile, validate_graph, DatasetSpec};
use crate::diversity::{sample_diverse, DiversityError, DiversityOptions, Metric};
use crate::dnn::{dnn_model, profile_overlay, DnnSpace, RESTRICTED_PROFILE};
use crate::emit::{emit_dot, emit_training_script, parse_ir, ArchitectureIR, IrProvenance, TrainConfig};
use crate::flatten::{flatten, to_cnf, write_flat, FlattenBounds};
use crate::fm::{parse_fm, Configuration, FeatureModel};
use crate::sat::{is_satisfiable, SampleError};

pub use manifest::{ArchStatus, RunManifest, RUN_MANIFEST};
pub use report::{
    accuracy_distribution, distribution_csv, efficiency, leaderboard, leaderboard_csv, leaderboard_text,
    LeaderboardEntry, MetricsRecord, RankKey,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_UNSAT: i32 = 4;
pub const EXIT_PARTIAL: i32 = 5;

pub const SAMPLE_MANIFEST: &str = "sample_manifest.json";
pub const LEADERBOARD_CSV: &str = "leaderboard.csv";
pub const DISTRIBUTION_CSV: &str = "accuracy_distribution.csv";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Display) -> Self {
        CliError { code, message: message.to_string() }
    }
}

fn usage(m: impl Display) -> CliError {
    CliError::new(EXIT_USAGE, m)
}

fn parse_err(m: impl Display) -> CliError {
    CliError::new(EXIT_PARSE, m)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    let code = if e.kind() == std::io::ErrorKind::NotFound { EXIT_USAGE } else { EXIT_IO };
    CliError::new(code, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    s.push('\n');
    s
}

#[derive(Debug, Parser)]
#[command(name = "featnet", version, about = "Sample, compile and rank neural architectures from a feature model")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dataset {
    Mnist,
    Cifar10,
}

impl Dataset {
    pub fn spec(self) -> DatasetSpec {
        match self {
            Dataset::Mnist => DatasetSpec::mnist(),
            Dataset::Cifar10 => DatasetSpec::cifar10(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Jaccard,
    Hamming,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Feature model file; defaults to the generated block/cell model.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    max_blocks: Option<u32>,
    #[arg(long)]
    max_cells: Option<u32>,
    /// Named constraint profile, e.g. `restricted`.
    #[arg(long)]
    profile: Option<String>,
    /// File with extra cross-tree constraints.
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the feature model
    Model {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Flatten the model and write its CNF
    Flatten {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a diverse sample of configurations
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(short, long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        iterations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "jaccard")]
        metric: MetricArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile configurations into IR and DOT files
    Compile {
        /// `.fncfg` files or directories containing them
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "mnist")]
        dataset: Dataset,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write DOT and training scripts for IR files
    Emit {
        /// `.ir.json` files or directories containing them
        #[arg(required = true)]
        irs: Vec<PathBuf>,
        #[arg(long, default_value_t = 12)]
        epochs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        subset: Option<u64>,
        #[arg(long, default_value_t = 128)]
        batch_size: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train IR files with an external trainer
    Evaluate {
        #[arg(required = true)]
        irs: Vec<PathBuf>,
        /// Defaults to the dataset each IR was compiled for.
        #[arg(long, value_enum)]
        dataset: Option<Dataset>,
        #[arg(long, default_value_t = 12)]
        epochs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        subset: Option<u64>,
        /// Trainer command line; IR, dataset, epochs, seed and output flags are appended.
        #[arg(long)]
        trainer: String,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank trained architectures
    Report {
        /// Directory of metrics JSON files
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "accuracy")]
        rank: RankKey,
        /// Where to write the CSV files; defaults to `dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Model { model } => {
            let (m, _, _) = load_model(&model)?;
            print!("{m}");
            Ok(EXIT_OK)
        }
        Command::Flatten { model, out } => cmd_flatten(&model, &out),
        Command::Sample { model, n, iterations, seed, metric, out } => {
            let metric = match metric {
                MetricArg::Jaccard => Metric::Jaccard,
                MetricArg::Hamming => Metric::Hamming,
            };
            cmd_sample(&model, n, iterations, seed, metric, &out)
        }
        Command::Compile { configs, dataset, out } => cmd_compile(&configs, &dataset.spec(), &out),
        Command::Emit { irs, epochs, seed, subset, batch_size, out } => {
            cmd_emit(&irs, epochs, seed, subset, batch_size, &out)
        }
        Command::Evaluate { irs, dataset, epochs, seed, subset, trainer, parallel, out } => {
            cmd_evaluate(&irs, dataset, epochs, seed, subset, &trainer, parallel, &out)
        }
        Command::Report { dir, rank, out } => cmd_report(&dir, rank, out.as_deref().unwrap_or(&dir)),
    }
}

struct LoadedModel {
    description: String,
    bounds: Option<(u32, u32)>,
}

fn load_model(a: &ModelArgs) -> Result<(FeatureModel, FlattenBounds, LoadedModel), CliError> {
    for v in [a.max_blocks, a.max_cells].into_iter().flatten() {
        if v == 0 {
            return Err(usage("block and cell bounds must be at least 1"));
        }
    }
    let (mut model, description, bounds) = match &a.model {
        Some(path) => {
            let m = parse_fm(&read(path)?).map_err(|e| parse_err(format_args!("{}: {e}", path.display())))?;
            let pairs: Vec<(&str, u32)> = [("Block", a.max_blocks), ("Cell", a.max_cells)]
                .into_iter()
                .filter_map(|(n, v)| v.map(|v| (n, v)))
                .collect();
            let bounds = FlattenBounds::from_names(&m, &pairs).map_err(usage)?;
            (m, path.display().to_string(), bounds)
        }
        None => {
            let b = a.max_blocks.unwrap_or(5);
            let c = a.max_cells.unwrap_or(5);
            let m = dnn_model(&DnnSpace::with_bounds(b, c)).expect("generated model parses");
            (m, format!("dnn {b}x{c}"), FlattenBounds::declared())
        }
    };
    if let Some(name) = &a.profile {
        let overlay = profile_overlay(name)
            .ok_or_else(|| usage(format_args!("unknown profile `{name}` (known: {RESTRICTED_PROFILE})")))?;
        model = model.with_overlay(overlay).map_err(parse_err)?;
    }
    if let Some(path) = &a.overlay {
        model = model
            .with_overlay(&read(path)?)
            .map_err(|e| parse_err(format_args!("{}: {e}", path.display())))?;
    }
    let bounds_pair = match a.model {
        None => Some((a.max_blocks.unwrap_or(5), a.max_cells.unwrap_or(5))),
        Some(_) => a.max_blocks.zip(a.max_cells),
    };
    Ok((model, bounds, LoadedModel { description, bounds: bounds_pair }))
}

fn cmd_flatten(a: &ModelArgs, out: &Path) -> Result<i32, CliError> {
    let (model, bounds, _) = load_model(a)?;
    let bm = flatten(&model, &bounds).map_err(usage)?;
    let cnf = to_cnf(&bm);
    write(out, &write_flat(&bm, &cnf))?;
    println!(
        "variables: {} ({} provenance, {} auxiliary)\nclauses: {}",
        cnf.num_vars,
        bm.len(),
        cnf.num_vars - bm.len(),
        cnf.clauses.len()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SampleManifest<'a> {
    model: &'a str,
    bounds: Option<(u32, u32)>,
    profile: Option<&'a str>,
    n: usize,
    seed: u64,
    iterations: u64,
    metric: &'static str,
    fitness: f64,
    initial_fitness: f64,
    accepted_swaps: usize,
    distances: Distances,
    configs: Vec<String>,
}

#[derive(Serialize)]
struct Distances {
    min: f64,
    mean: f64,
    max: f64,
}

pub fn config_file_name(index: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(4);
    format!("config_{index:0width$}.fncfg")
}

fn cmd_sample(a: &ModelArgs, n: usize, iterations: u64, seed: u64, metric: Metric, out: &Path) -> Result<i32, CliError> {
    let started = Instant::now();
    if n == 0 {
        return Err(usage("sample size must be at least 1"));
    }
    let (model, bounds, loaded) = load_model(a)?;
    let bm = flatten(&model, &bounds).map_err(usage)?;
    let cnf = to_cnf(&bm);
    if !is_satisfiable(&cnf) {
        return Err(CliError::new(EXIT_UNSAT, "the model has no valid configuration"));
    }
    let opts = DiversityOptions { n, iterations, seed, metric, parallel: true };
    let sample = sample_diverse(&bm, &cnf, &opts).map_err(|e| match e {
        DiversityError::Sample(SampleError::Unsat) => CliError::new(EXIT_UNSAT, e),
        other => CliError::new(EXIT_IO, other),
    })?;
    create_dir(out)?;
    let mut names = Vec::with_capacity(n);
    for (i, c) in sample.configurations.iter().enumerate() {
        let name = config_file_name(i, n);
        write(&out.join(&name), &c.to_fncfg())?;
        names.push(name);
    }
    let manifest = SampleManifest {
        model: &loaded.description,
        bounds: loaded.bounds,
        profile: a.profile.as_deref(),
        n,
        seed,
        iterations,
        metric: match metric {
            Metric::Jaccard => "jaccard",
            Metric::Hamming => "hamming",
        },
        fitness: sample.fitness,
        initial_fitness: sample.initial_fitness,
        accepted_swaps: sample.accepted.len(),
        distances: Distances {
            min: sample.distances.min,
            mean: sample.distances.mean,
            max: sample.distances.max,
        },
        configs: names,
    };
    write(&out.join(SAMPLE_MANIFEST), &canonical_json(&manifest))?;

    let mut run = RunManifest::load_or_default(out);
    run.model = Some(loaded.description);
    run.bounds = loaded.bounds;
    run.profile = a.profile.clone();
    run.sample_size = Some(n);
    run.seeds.insert("sample".into(), seed);
    run.timing.insert("sample".into(), started.elapsed().as_secs_f64());
    write(&out.join(RUN_MANIFEST), &canonical_json(&run))?;
    println!("wrote {n} configurations to {} (fitness {:.4})", out.display(), sample.fitness);
    Ok(EXIT_OK)
}

/// Files with the given suffix, expanding directories; sorted and deduplicated.
fn collect_inputs(paths: &[PathBuf], suffix: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|e| io_err(p, e))?;
            for e in entries {
                let path = e.map_err(|e| io_err(p, e))?.path();
                if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)) {
                    files.push(path);
                }
            }
        } else if p.exists() {
            files.push(p.clone());
        } else {
            return Err(usage(format_args!("{}: no such file or directory", p.display())));
        }
    }
    files.sort();
    files.dedup();
    if files.is_empty() {
        return Err(usage(format_args!("no `*{suffix}` inputs found")));
    }
    Ok(files)
}

/// File name without `suffix` (or without its extension when it lacks it).
fn arch_id(path: &Path, suffix: &str) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    match name.strip_suffix(suffix) {
        Some(stem) => stem.to_string(),
        None => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or(name),
    }
}

fn sample_seed(config: &Path) -> Option<u64> {
    let dir = config.parent()?;
    let text = std::fs::read_to_string(dir.join(SAMPLE_MANIFEST)).ok()?;
    serde_json::from_str::<serde_json::Value>(&text).ok()?.get("seed")?.as_u64()
}

fn cmd_compile(configs: &[PathBuf], dataset: &DatasetSpec, out: &Path) -> Result<i32, CliError> {
    let started = Instant::now();
    let files = collect_inputs(configs, ".fncfg")?;
    create_dir(out)?;
    let mut run = RunManifest::load_or_default(out);
    run.dataset = Some(dataset.name.clone());
    let (mut ok, mut typed, mut failed) = (0, 0, 0);
    for path in &files {
        let id = arch_id(path, ".fncfg");
        let status = match compile_one(path, &id, dataset, out) {
            Ok(s) => s,
            Err(e) => ArchStatus::Failed { diagnostics: e.message },
        };
        match &status {
            ArchStatus::Compiled => ok += 1,
            ArchStatus::CompileError { kind, .. } => {
                typed += 1;
                println!("{id}: {kind}");
            }
            _ => failed += 1,
        }
        run.statuses.insert(id, status);
    }
    run.timing.insert("compile".into(), started.elapsed().as_secs_f64());
    write(&out.join(RUN_MANIFEST), &canonical_json(&run))?;
    println!("compiled {ok}, compile errors {typed}, unreadable {failed}");
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

fn compile_one(path: &Path, id: &str, dataset: &DatasetSpec, out: &Path) -> Result<ArchStatus, CliError> {
    let text = read(path)?;
    let config = Configuration::parse_fncfg(&text).map_err(parse_err)?;
    let g = match compile(&config, dataset) {
        Ok(g) => g,
        Err(e) => return Ok(ArchStatus::CompileError { kind: e.kind, message: e.message }),
    };
    if let Some(e) = validate_graph(&g).into_iter().next() {
        return Ok(ArchStatus::CompileError { kind: e.kind, message: e.message });
    }
    let mut prov = IrProvenance::from_config_text(&text);
    if let Some(seed) = sample_seed(path) {
        prov = prov.with_seed("sample", seed);
    }
    write(&out.join(format!("{id}.ir.json")), &ArchitectureIR::from_graph(&g, prov).to_json())?;
    write(&out.join(format!("{id}.dot")), &emit_dot(&g))?;
    Ok(ArchStatus::Compiled)
}

fn cmd_emit(
    irs: &[PathBuf],
    epochs: u32,
    seed: u64,
    subset: Option<u64>,
    batch_size: u32,
    out: &Path,
) -> Result<i32, CliError> {
    let files = collect_inputs(irs, ".ir.json")?;
    create_dir(out)?;
    let mut failed = 0;
    for path in &files {
        let id = arch_id(path, ".ir.json");
        let result = read(path).and_then(|t| parse_ir(&t).map_err(parse_err)).and_then(|ir| {
            let g = ir.to_graph().map_err(parse_err)?;
            let t = TrainConfig { epochs, batch_size, dataset: ir.dataset.name.clone(), subset, seed };
            let script = emit_training_script(&ir, &id, &t).map_err(usage)?;
            write(&out.join(format!("{id}.dot")), &emit_dot(&g))?;
            write(&out.join(format!("{id}.train.py")), &script)
        });
        if let Err(e) = result {
            eprintln!("{id}: {}", e.message);
            failed += 1;
        }
    }
    println!("emitted {} of {}", files.len() - failed, files.len());
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

/// Resolves the program of a trainer command line without running it.
fn resolve_program(program: &str) -> Option<PathBuf> {
    let p = Path::new(program);
    if p.components().count() > 1 {
        return p.is_file().then(|| p.to_path_buf());
    }
    std::env::split_paths(&std::env::var_os("PATH")?).map(|d| d.join(program)).find(|c| c.is_file())
}

fn tail(bytes: &[u8], max: usize) -> String {
    let s = String::from_utf8_lossy(bytes);
    let s = s.trim_end();
    match s.char_indices().rev().nth(max) {
        Some((i, _)) => format!("...{}", &s[i..]),
        None => s.to_string(),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    irs: &[PathBuf],
    dataset: Option<Dataset>,
    epochs: u32,
    seed: u64,
    subset: Option<u64>,
    trainer: &str,
    parallel: usize,
    out: &Path,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let words: Vec<&str> = trainer.split_whitespace().collect();
    let Some((program, fixed)) = words.split_first() else {
        return Err(usage("empty trainer command"));
    };
    let program = resolve_program(program).ok_or_else(|| usage(format_args!("trainer `{program}` not found")))?;
    let files = collect_inputs(irs, ".ir.json")?;
    create_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| CliError::new(EXIT_IO, e))?;
    let results: Vec<(String, ArchStatus)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let id = arch_id(path, ".ir.json");
                let status = train_one(path, &id, &program, fixed, dataset, epochs, seed, subset, out);
                (id, status)
            })
            .collect()
    });
    let mut run = RunManifest::load_or_default(out);
    run.seeds.insert("train".into(), seed);
    let mut failed = 0;
    for (id, status) in results {
        match &status {
            ArchStatus::Failed { diagnostics } => {
                failed += 1;
                eprintln!("{id}: {diagnostics}");
            }
            ArchStatus::Trained { accuracy, .. } => {
                println!("{id}: {}", accuracy.map_or("-".to_string(), |a| format!("{:.2}%", a * 100.0)))
            }
            _ => {}
        }
        run.statuses.insert(id, status);
    }
    run.timing.insert("evaluate".into(), started.elapsed().as_secs_f64());
    write(&out.join(RUN_MANIFEST), &canonical_json(&run))?;
    println!("trained {}, failed {failed}", files.len() - failed);
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

#[allow(clippy::too_many_arguments)]
fn train_one(
    ir_path: &Path,
    id: &str,
    program: &Path,
    fixed: &[&str],
    dataset: Option<Dataset>,
    epochs: u32,
    seed: u64,
    subset: Option<u64>,
    out: &Path,
) -> ArchStatus {
    let failed = |d: String| ArchStatus::Failed { diagnostics: d };
    let ir = match read(ir_path).and_then(|t| parse_ir(&t).map_err(parse_err)) {
        Ok(ir) => ir,
        Err(e) => return failed(e.message),
    };
    let dataset_name = match dataset {
        Some(d) => d.spec().name,
        None => ir.dataset.name.clone(),
    };
    let metrics_name = format!("{id}.metrics.json");
    let metrics_path = out.join(&metrics_name);
    let _ = std::fs::remove_file(&metrics_path);
    let mut cmd = Process::new(program);
    cmd.args(fixed)
        .arg("--ir")
        .arg(ir_path)
        .args(["--dataset", &dataset_name, "--epochs", &epochs.to_string(), "--seed", &seed.to_string()]);
    if let Some(k) = subset {
        cmd.args(["--subset", &k.to_string()]);
    }
    cmd.arg("--out").arg(&metrics_path);
    let output = match cmd.output() {
        Ok(o) => o,
        Err(e) => return failed(format!("could not start trainer: {e}")),
    };
    if !output.status.success() {
        return failed(format!("trainer exited with {}: {}", output.status, tail(&output.stderr, 2000)));
    }
    let record: MetricsRecord = match std::fs::read_to_string(&metrics_path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => return failed(format!("unreadable metrics {metrics_name}: {e}")),
    };
    if let Err(e) = record.check() {
        return failed(format!("{metrics_name}: {e}"));
    }
    if record.epochs != epochs {
        return failed(format!("{metrics_name}: trained {} epochs, asked for {epochs}", record.epochs));
    }
    if record.size != ir.total_size {
        return failed(format!("{metrics_name}: trainer counts {} weights, IR says {}", record.size, ir.total_size));
    }
    ArchStatus::Trained { metrics: metrics_name, accuracy: record.final_accuracy() }
}

fn cmd_report(dir: &Path, rank: RankKey, out: &Path) -> Result<i32, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for p in paths {
        let Ok(r) = serde_json::from_str::<MetricsRecord>(&read(&p)?) else { continue };
        match r.check() {
            Ok(()) => records.push(r),
            Err(e) => eprintln!("skipping {}: {e}", p.display()),
        }
    }
    let rows = leaderboard(&records, rank);
    if rows.is_empty() {
        return Err(usage(format_args!("no usable metrics records in {}", dir.display())));
    }
    create_dir(out)?;
    write(&out.join(LEADERBOARD_CSV), &leaderboard_csv(&rows))?;
    write(&out.join(DISTRIBUTION_CSV), &distribution_csv(&accuracy_distribution(&rows)))?;
    print!("{}", leaderboard_text(&rows));
    Ok(EXIT_OK)
}
