//! Command-line front end: CSV ingestion, selection runs, benchmark
//! experiments and report files.

pub mod ingest;
pub mod output;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use allrel::bench::{
    run_semisynthetic, run_synthetic_grid, run_tree_sweep, score_selection, summarize, Algorithm,
    BenchSettings, BenchmarkRecord,
};
use allrel::datagen::{generate_xor_set, grid_sizes};
use allrel::{run_ace, run_boruta, AceConfig, BorutaConfig, ForestConfig, SelectionStatus};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ingest::{ingest_csv, write_csv};
use crate::output::{
    atomic_write, confirmed_sets_csv, difficulty_csv, records_jsonl, summary_csv, timing_csv,
    timing_path, to_json_bytes, BenchManifest, InputInfo, SelectDocument, Timing, TOOL, VERSION,
};

/// Desk-scale grid run when neither --cells nor --full is given.
pub const DESK_CELLS: [(usize, usize); 5] = [(2000, 125), (125, 2000), (500, 125), (500, 250), (2000, 250)];

#[derive(Debug, Parser)]
#[command(name = "allrel", version, about = "All-relevant feature selection with random forests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Boruta or ACE on a CSV file and write a result document.
    Select(SelectArgs),
    /// Write a synthetic XOR dataset as CSV.
    GenXor(GenXorArgs),
    /// Synthetic XOR grid experiment.
    BenchGrid(GridArgs),
    /// Noise-extended real dataset experiment.
    BenchSemisynth(SemisynthArgs),
    /// Forest-size sweep, optionally with a permuted-copy control.
    BenchSweep(SweepArgs),
    /// Compare a selection with the ground truth.
    Score(ScoreArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Boruta,
    Ace,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the decision column; defaults to the last column.
    #[arg(long)]
    pub decision: Option<String>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long, value_enum, default_value = "boruta")]
    pub algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    /// Attributes tried per split; defaults to floor(sqrt(attributes)).
    #[arg(long)]
    pub mtry: Option<usize>,
    /// Boruta iteration limit.
    #[arg(long, default_value_t = 100)]
    pub max_runs: usize,
    /// Significance level; 0.01 for Boruta, 0.05 for ACE when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// ACE replicates per stage.
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    /// ACE wall-clock budget in seconds; runs it cuts short are not reproducible.
    #[arg(long)]
    pub time_budget: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result document path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenXorArgs {
    #[arg(long)]
    pub objects: usize,
    #[arg(long)]
    pub attributes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the names of the relevant attributes, one per line.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchCommon {
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Trees per forest for every algorithm.
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    #[arg(long, default_value_t = 100)]
    pub max_runs: usize,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated OBJECTSxATTRIBUTES cells, e.g. 2000x125,125x2000.
    #[arg(long, conflicts_with = "full")]
    pub cells: Option<String>,
    /// The complete 5 x 6 grid.
    #[arg(long)]
    pub full: bool,
    /// Comma-separated subset of top,boruta,ace.
    #[arg(long, default_value = "top,boruta,ace")]
    pub algorithms: String,
    #[command(flatten)]
    pub common: BenchCommon,
}

#[derive(Debug, Args)]
pub struct SemisynthArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Comma-separated total attribute counts.
    #[arg(long, default_value = "125,500,2000")]
    pub totals: String,
    /// Base set name used in records; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
    #[command(flatten)]
    pub common: BenchCommon,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Comma-separated ascending forest sizes.
    #[arg(long, default_value = "500,1000,2000,5000,10000,20000,50000,100000")]
    pub tree_counts: String,
    /// Also run on the data extended with this many permuted copies.
    #[arg(long, num_args = 0..=1, default_missing_value = "1000")]
    pub control: Option<usize>,
    #[command(flatten)]
    pub common: BenchCommon,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Selected names, one per line, or a `select` result document.
    #[arg(long)]
    pub selection: PathBuf,
    /// Relevant names, one per line.
    #[arg(long)]
    pub truth: PathBuf,
    /// All attribute names, one per line; defaults to selection plus truth.
    #[arg(long)]
    pub universe: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Select(a) => with_jobs(a.jobs, || select(&a)),
        Command::GenXor(a) => gen_xor(&a),
        Command::BenchGrid(a) => with_jobs(a.common.jobs, || bench_grid(&a)),
        Command::BenchSemisynth(a) => with_jobs(a.common.jobs, || bench_semisynth(&a)),
        Command::BenchSweep(a) => with_jobs(a.common.jobs, || bench_sweep(&a)),
        Command::Score(a) => score(&a),
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot start worker threads")?
            .install(f),
    }
}

fn forest(trees: usize, mtry: Option<usize>) -> ForestConfig {
    ForestConfig {
        num_trees: trees,
        mtry,
        ..Default::default()
    }
}

fn select(a: &SelectArgs) -> Result<()> {
    let ingested = ingest_csv(&a.input.data, a.input.decision.as_deref())
        .with_context(|| format!("reading {}", a.input.data.display()))?;
    let data = &ingested.dataset;
    let start = Instant::now();
    let result = match a.algorithm {
        AlgorithmArg::Boruta => run_boruta(
            data,
            &BorutaConfig {
                max_runs: a.max_runs,
                alpha: a.alpha.unwrap_or(0.01),
                forest: forest(a.trees, a.mtry),
                seed: a.seed,
            },
        )?,
        AlgorithmArg::Ace => run_ace(
            data,
            &AceConfig {
                replicates: a.replicates,
                alpha: a.alpha.unwrap_or(0.05),
                forest: forest(a.trees, a.mtry),
                seed: a.seed,
                time_budget_secs: a.time_budget,
                ..Default::default()
            },
        )?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let names = |s: SelectionStatus| -> Vec<String> {
        result.with_status(s).iter().map(|d| d.name.clone()).collect()
    };
    let doc = SelectDocument {
        tool: TOOL,
        version: VERSION,
        command: "select",
        input: InputInfo {
            path: a.input.data.display().to_string(),
            decision_column: ingested.decision_column.clone(),
            n_objects: data.n_objects(),
            n_attributes: data.n_attributes(),
        },
        seed: a.seed,
        config: result.config.clone(),
        class_labels: data.class_labels().to_vec(),
        code_tables: ingested.code_tables.clone(),
        confirmed: names(SelectionStatus::Confirmed),
        tentative: names(SelectionStatus::Tentative),
        attributes: result.attributes.clone(),
        iterations_run: result.iterations_run,
        budget_exhausted: result.budget_exhausted,
        history: result.history.clone(),
    };
    let bytes = to_json_bytes(&doc)?;
    match &a.out {
        None => {
            print!("{}", String::from_utf8(bytes)?);
            eprintln!("finished in {seconds:.2}s");
        }
        Some(path) => {
            atomic_write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
            let timing = Timing {
                command: "select",
                wall_clock_seconds: seconds,
            };
            atomic_write(&timing_path(path), &to_json_bytes(&timing)?)?;
            eprintln!(
                "{} confirmed, {} tentative; written to {}",
                doc.confirmed.len(),
                doc.tentative.len(),
                path.display()
            );
        }
    }
    Ok(())
}

fn gen_xor(a: &GenXorArgs) -> Result<()> {
    let data = generate_xor_set(a.objects, a.attributes, a.seed)?;
    let mut buf = Vec::new();
    write_csv(&data, &mut buf)?;
    atomic_write(&a.out, &buf).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(path) = &a.truth {
        let mut text = String::new();
        for m in data.meta().iter().filter(|m| m.relevant == Some(true)) {
            text.push_str(&m.name);
            text.push('\n');
        }
        atomic_write(path, text.as_bytes())?;
    }
    Ok(())
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>> {
    let out: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad {what} '{s}'")))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        bail!("empty {what} list");
    }
    Ok(out)
}

pub fn parse_cells(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(|cell| {
            let (n, p) = cell
                .trim()
                .split_once(['x', 'X'])
                .with_context(|| format!("cell '{cell}' is not OBJECTSxATTRIBUTES"))?;
            let n: usize = n.trim().parse().with_context(|| format!("bad objects in '{cell}'"))?;
            let p: usize = p.trim().parse().with_context(|| format!("bad attributes in '{cell}'"))?;
            if n == 0 || p == 0 {
                bail!("cell '{cell}' is empty");
            }
            Ok((n, p))
        })
        .collect()
}

fn parse_algorithms(text: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for s in text.split(',') {
        let a = match s.trim().to_ascii_lowercase().as_str() {
            "top" => Algorithm::Top,
            "boruta" => Algorithm::Boruta,
            "ace" => Algorithm::Ace,
            other => bail!("unknown algorithm '{other}'"),
        };
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

fn settings(c: &BenchCommon) -> BenchSettings {
    let mut s = BenchSettings::default();
    s.boruta.forest.num_trees = c.trees;
    s.boruta.max_runs = c.max_runs;
    s.ace.forest.num_trees = c.trees;
    s.top_forest.num_trees = c.trees;
    s
}

fn write_bench<S: Serialize>(
    command: &'static str,
    common: &BenchCommon,
    settings: S,
    records: &[BenchmarkRecord],
    extra: &[(&str, Vec<u8>)],
) -> Result<()> {
    let dir = &common.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let manifest = BenchManifest {
        tool: TOOL,
        version: VERSION,
        command,
        seed: common.seed,
        repetitions: common.reps,
        settings,
        records: records.len(),
    };
    let summary = summarize(records);
    let mut files: Vec<(&str, Vec<u8>)> = vec![
        ("manifest.json", to_json_bytes(&manifest)?),
        ("records.jsonl", records_jsonl(records)?),
        ("summary.csv", summary_csv(&summary)?),
        ("timing.csv", timing_csv(records)?),
    ];
    files.extend(extra.iter().cloned());
    if command == "bench-grid" {
        files.push(("difficulty.csv", difficulty_csv(&summary)?));
    }
    // everything is serialized before the first write
    for (name, bytes) in &files {
        let path = dir.join(name);
        atomic_write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!("{} records written to {}", records.len(), dir.display());
    Ok(())
}

#[derive(Serialize)]
struct GridSettings<'a> {
    cells: &'a [(usize, usize)],
    algorithms: &'a [Algorithm],
    #[serde(flatten)]
    bench: &'a BenchSettings,
}

fn bench_grid(a: &GridArgs) -> Result<()> {
    let cells = match (&a.cells, a.full) {
        (Some(text), _) => parse_cells(text)?,
        (None, true) => grid_sizes(),
        (None, false) => DESK_CELLS.to_vec(),
    };
    let algorithms = parse_algorithms(&a.algorithms)?;
    let s = settings(&a.common);
    let records = run_synthetic_grid(&cells, &algorithms, a.common.reps, a.common.seed, &s)?;
    let gs = GridSettings {
        cells: &cells,
        algorithms: &algorithms,
        bench: &s,
    };
    write_bench("bench-grid", &a.common, gs, &records, &[])
}

#[derive(Serialize)]
struct SemisynthSettings<'a> {
    base_set: &'a str,
    data: String,
    totals: &'a [usize],
    #[serde(flatten)]
    bench: &'a BenchSettings,
}

fn bench_semisynth(a: &SemisynthArgs) -> Result<()> {
    let ingested = ingest_csv(&a.input.data, a.input.decision.as_deref())
        .with_context(|| format!("reading {}", a.input.data.display()))?;
    let totals = parse_list(&a.totals, "total")?;
    let name = a.name.clone().unwrap_or_else(|| {
        a.input
            .data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "base".into())
    });
    let s = settings(&a.common);
    let records = run_semisynthetic(&ingested.dataset, &name, &totals, a.common.reps, a.common.seed, &s)?;
    let ss = SemisynthSettings {
        base_set: &name,
        data: a.input.data.display().to_string(),
        totals: &totals,
        bench: &s,
    };
    write_bench("bench-semisynth", &a.common, ss, &records, &[])
}

#[derive(Serialize)]
struct SweepSettings<'a> {
    data: String,
    tree_counts: &'a [usize],
    control: Option<usize>,
    #[serde(flatten)]
    bench: &'a BenchSettings,
}

fn bench_sweep(a: &SweepArgs) -> Result<()> {
    let ingested = ingest_csv(&a.input.data, a.input.decision.as_deref())
        .with_context(|| format!("reading {}", a.input.data.display()))?;
    let counts = parse_list(&a.tree_counts, "tree count")?;
    let s = settings(&a.common);
    let records = run_tree_sweep(&ingested.dataset, &counts, a.common.reps, a.control, a.common.seed, &s)?;
    let ss = SweepSettings {
        data: a.input.data.display().to_string(),
        tree_counts: &counts,
        control: a.control,
        bench: &s,
    };
    let sets = confirmed_sets_csv(&records)?;
    write_bench("bench-sweep", &a.common, ss, &records, &[("confirmed_sets.csv", sets)])
}

/// Reads names one per line (blank lines ignored), or the confirmed names
/// of a `select` result document.
pub fn read_names(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let doc: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        let confirmed = doc
            .get("confirmed")
            .and_then(|c| c.as_array())
            .with_context(|| format!("{} has no confirmed list", path.display()))?;
        return confirmed
            .iter()
            .map(|v| v.as_str().map(str::to_string).context("non-string attribute name"))
            .collect();
    }
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn score(a: &ScoreArgs) -> Result<()> {
    let selected = read_names(&a.selection)?;
    let truth = read_names(&a.truth)?;
    let universe: Vec<String> = match &a.universe {
        Some(p) => read_names(p)?,
        None => selected
            .iter()
            .chain(&truth)
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let c = score_selection(&selected, &truth, &universe)?;
    println!(
        "TP={} FP={} FN={} precision={} recall={} F={}",
        c.tp, c.fp, c.fn_, c.precision, c.recall, c.f_score
    );
    Ok(())
}
