//! Command-line front end for the compressed time-series store: ingest CSV
//! data, compress series, evaluate queries with deterministic error
//! guarantees, inspect the catalog, and size up the uniform-sampling
//! alternative.
//!
//! Human output is line-oriented `key=value` pairs with six decimal places;
//! `--json` switches to one JSON object per command with exact numbers.
//! Exit status is 0 on success, 1 on usage errors (bad flags, malformed
//! queries), and 2 on data or evaluation errors, with a machine-readable
//! `error: <code>: <message>` line on stderr.

use std::collections::BTreeSet;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use segbound::compress::{compress, SegmentationSpec};
use segbound::core::restrict;
use segbound::engine::{eval_approx, eval_exact, materialize, parse, Tse, TsaAst};
use segbound::families::family_by_id;
use segbound::sampling::required_sample_size;
use segbound::store::Catalog;
use segbound::{Error, Result};

/// Compressed time-series analytics with guaranteed error bounds.
#[derive(Parser)]
#[command(name = "segbound", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load series from a CSV file (header `series_id,t,value`) into a store.
    Ingest {
        /// CSV file to read.
        csv: PathBuf,
        /// Store directory (created if missing).
        #[arg(long)]
        store: PathBuf,
        /// Emit one JSON object instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Fit one raw series (or all of them) with a function family.
    Compress {
        /// Series to compress; omit it and pass --all for every raw series.
        series_id: Option<String>,
        /// Compress every raw series in the store.
        #[arg(long)]
        all: bool,
        /// Function family: p0, p1, p2, or g.
        #[arg(long)]
        family: String,
        /// Segmentation: `fixed:<len>` or `sliding:<tau>[:<max_len>]`.
        #[arg(long)]
        seg: String,
        /// Store directory.
        #[arg(long)]
        store: PathBuf,
        /// Emit one JSON object instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a query against compressed data.
    Query {
        /// Query text, e.g. `Sum(T1 * Shift(T2, 3), 10, 50)`.
        expr: String,
        #[command(flatten)]
        flags: QueryFlags,
    },
    /// Shortcuts for the built-in statistics.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Describe every series in the store.
    Info {
        /// Store directory.
        #[arg(long)]
        store: PathBuf,
        /// Emit one JSON object instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Compare stored numbers against the sample count a uniform-sampling
    /// estimator needs for the same error target.
    CompareSampling {
        /// Aggregation query, e.g. `Sum(T1 * T2)`.
        expr: String,
        /// Store directory.
        #[arg(long)]
        store: PathBuf,
        /// Failure probability budget for the sampling bound, in (0, 1).
        #[arg(long)]
        beta: f64,
        /// Error target; defaults to the query's own guarantee.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Emit one JSON object instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
}

/// Flags shared by `query` and every `stats` shortcut.
#[derive(Args)]
struct QueryFlags {
    /// Store directory.
    #[arg(long)]
    store: PathBuf,
    /// Also evaluate on raw data and print the observed error.
    #[arg(long)]
    oracle: bool,
    /// Emit one JSON object instead of key=value lines.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Pearson correlation of two series.
    Corr {
        left: String,
        right: String,
        #[command(flatten)]
        flags: QueryFlags,
    },
    /// Cross-correlation of two series at a lag.
    Ccorr {
        left: String,
        right: String,
        #[arg(allow_negative_numbers = true)]
        lag: i64,
        #[command(flatten)]
        flags: QueryFlags,
    },
    /// Autocorrelation of a series at a lag.
    Acorr {
        series: String,
        #[arg(allow_negative_numbers = true)]
        lag: i64,
        #[command(flatten)]
        flags: QueryFlags,
    },
    /// Mean of a series.
    Mu {
        series: String,
        #[command(flatten)]
        flags: QueryFlags,
    },
    /// Population standard deviation of a series.
    Sigma {
        series: String,
        #[command(flatten)]
        flags: QueryFlags,
    },
}

impl StatsCommand {
    /// The query text this shortcut stands for, plus its shared flags.
    fn into_query(self) -> (String, QueryFlags) {
        match self {
            StatsCommand::Corr { left, right, flags } => (format!("Corr({left}, {right})"), flags),
            StatsCommand::Ccorr { left, right, lag, flags } => {
                (format!("CCorr({left}, {right}, {lag})"), flags)
            }
            StatsCommand::Acorr { series, lag, flags } => (format!("ACorr({series}, {lag})"), flags),
            StatsCommand::Mu { series, flags } => (format!("Mu({series})"), flags),
            StatsCommand::Sigma { series, flags } => (format!("Sigma({series})"), flags),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help and version to stdout (a successful exit) and
            // real usage errors to stderr; map the latter onto exit code 1.
            let usage = err.use_stderr();
            let _ = err.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {err}", err.code());
            ExitCode::from(if err.is_usage() { 1 } else { 2 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { csv, store, json } => cmd_ingest(&csv, &store, json),
        Command::Compress { series_id, all, family, seg, store, json } => {
            cmd_compress(series_id.as_deref(), all, &family, &seg, &store, json)
        }
        Command::Query { expr, flags } => cmd_query("query", &expr, &flags),
        Command::Stats(stats) => {
            let (expr, flags) = stats.into_query();
            cmd_query("stats", &expr, &flags)
        }
        Command::Info { store, json } => cmd_info(&store, json),
        Command::CompareSampling { expr, store, beta, epsilon, json } => {
            cmd_compare_sampling(&expr, &store, beta, epsilon, json)
        }
    }
}

/// Opens an existing store, or starts an empty catalog when the directory
/// holds no store yet (first `ingest` into a fresh path).
fn load_or_create(dir: &Path) -> Result<Catalog> {
    if dir.join("raw.csv").exists() || dir.join("segments.jsonl").exists() {
        Catalog::load(dir)
    } else {
        Ok(Catalog::new())
    }
}

fn cmd_ingest(csv: &Path, store: &Path, json: bool) -> Result<()> {
    let mut catalog = load_or_create(store)?;
    let ids = catalog.ingest_csv(File::open(csv)?)?;
    catalog.save(store)?;
    if json {
        let series: Vec<serde_json::Value> = ids
            .iter()
            .map(|id| {
                let points = catalog.raw(id).map_or(0, |s| s.values.len());
                serde_json::json!({ "id": id, "points": points })
            })
            .collect();
        println!("{}", serde_json::json!({ "command": "ingest", "series": series }));
    } else {
        for id in &ids {
            let points = catalog.raw(id).map_or(0, |s| s.values.len());
            println!("series={id} points={points}");
        }
    }
    Ok(())
}

fn cmd_compress(
    series_id: Option<&str>,
    all: bool,
    family_id: &str,
    seg: &str,
    store: &Path,
    json: bool,
) -> Result<()> {
    if series_id.is_some() == all {
        return Err(Error::invalid_argument("pass exactly one of <series_id> or --all"));
    }
    // Validate the fit parameters before touching the store.
    family_by_id(family_id)?;
    let spec = SegmentationSpec::parse(seg)?;

    let mut catalog = Catalog::load(store)?;
    let targets: Vec<String> = match series_id {
        Some(id) => vec![id.to_string()],
        None => catalog.raw_ids().iter().map(|s| s.to_string()).collect(),
    };
    let mut rows = Vec::new();
    for id in &targets {
        let series =
            catalog.raw(id).cloned().ok_or_else(|| Error::UnknownSeries(id.clone()))?;
        let compressed = compress(&series, family_id, &spec)?;
        rows.push((
            id.clone(),
            compressed.segments().len(),
            compressed.stored_numbers(),
            compressed.compression_ratio(series.values.len()),
        ));
        catalog.insert_compressed(compressed);
    }
    catalog.save(store)?;
    if json {
        let series: Vec<serde_json::Value> = rows
            .iter()
            .map(|(id, segments, stored, ratio)| {
                serde_json::json!({
                    "id": id,
                    "segments": segments,
                    "stored_numbers": stored,
                    "compression_ratio": ratio,
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::json!({ "command": "compress", "family": family_id, "series": series })
        );
    } else {
        for (id, segments, stored, ratio) in &rows {
            println!("series={id} segments={segments} stored_numbers={stored} ratio={ratio:.6}");
        }
    }
    Ok(())
}

fn cmd_query(command: &str, expr: &str, flags: &QueryFlags) -> Result<()> {
    let ast = parse(expr)?;
    let catalog = Catalog::load(&flags.store)?;
    let answer = eval_approx(&ast, &catalog)?;
    // The oracle needs raw data and a well-defined exact value; when either
    // is missing the line is simply omitted.
    let true_error = if flags.oracle {
        eval_exact(&ast, &catalog).ok().map(|exact| (answer.value - exact).abs())
    } else {
        None
    };
    if flags.json {
        let mut object = serde_json::json!({
            "command": command,
            "expr": expr,
            "value": answer.value,
            "guarantee": answer.guarantee,
        });
        if let Some(err) = true_error {
            object["true_error"] = serde_json::json!(err);
        }
        println!("{object}");
    } else {
        println!("value={:.6}", answer.value);
        println!("guarantee={:.6}", answer.guarantee);
        if let Some(err) = true_error {
            println!("true_error={err:.6}");
        }
    }
    Ok(())
}

fn cmd_info(store: &Path, json: bool) -> Result<()> {
    let catalog = Catalog::load(store)?;
    let mut ids: Vec<String> = catalog.raw_ids().iter().map(|s| s.to_string()).collect();
    for id in catalog.compressed_ids() {
        if !ids.iter().any(|known| known == id) {
            ids.push(id.to_string());
        }
    }
    ids.sort();

    let mut rows = Vec::new();
    for id in &ids {
        let compressed = catalog.compressed(id);
        // Segments tile the original domain, so either side knows the length.
        let points = match (catalog.raw(id), compressed) {
            (Some(raw), _) => raw.values.len(),
            (None, Some(c)) => c.domain().len(),
            (None, None) => unreachable!("id came from the catalog"),
        };
        let summary = compressed.map(|c| {
            (c.family.id, c.segments().len(), c.stored_numbers(), c.compression_ratio(points))
        });
        rows.push((id.clone(), points, summary));
    }

    if json {
        let series: Vec<serde_json::Value> = rows
            .iter()
            .map(|(id, points, summary)| match summary {
                Some((family, segments, stored, ratio)) => serde_json::json!({
                    "id": id,
                    "points": points,
                    "family": family,
                    "segments": segments,
                    "stored_numbers": stored,
                    "compression_ratio": ratio,
                }),
                None => serde_json::json!({ "id": id, "points": points, "family": null }),
            })
            .collect();
        println!("{}", serde_json::json!({ "command": "info", "series": series }));
    } else {
        for (id, points, summary) in &rows {
            match summary {
                Some((family, segments, stored, ratio)) => println!(
                    "series={id} points={points} family={family} segments={segments} \
                     stored_numbers={stored} ratio={ratio:.6}"
                ),
                None => println!("series={id} points={points} family=none"),
            }
        }
    }
    Ok(())
}

/// Collects the ids of every stored series the expression references.
fn collect_refs(tse: &Tse, out: &mut BTreeSet<String>) {
    match tse {
        Tse::Ref(id) => {
            out.insert(id.clone());
        }
        Tse::Constant { .. } => {}
        Tse::Shift { inner, .. } => collect_refs(inner, out),
        Tse::Binary { lhs, rhs, .. } => {
            collect_refs(lhs, out);
            collect_refs(rhs, out);
        }
    }
}

fn cmd_compare_sampling(
    expr: &str,
    store: &Path,
    beta: f64,
    epsilon_flag: Option<f64>,
    json: bool,
) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid_argument(format!("beta must lie in (0, 1), got {beta}")));
    }
    if let Some(e) = epsilon_flag {
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::invalid_argument(format!(
                "epsilon must be finite and > 0, got {e}"
            )));
        }
    }
    let ast = parse(expr)?;
    let TsaAst::Agg { tse, range } = &ast else {
        return Err(Error::invalid_argument(
            "compare-sampling needs an aggregation query like `Sum(T1 * T2)`",
        ));
    };
    let catalog = Catalog::load(store)?;

    // Numbers the compressed answer reads: every segment of every series the
    // expression references.
    let mut refs = BTreeSet::new();
    collect_refs(tse, &mut refs);
    let mut stored = 0usize;
    for id in &refs {
        let compressed = catalog.compressed(id).ok_or_else(|| {
            Error::UnknownSeries(format!("{id} has no compressed form (compress it first)"))
        })?;
        stored += compressed.stored_numbers();
    }

    let epsilon = match epsilon_flag {
        Some(e) => e,
        None => eval_approx(&ast, &catalog)?.guarantee,
    };

    // The sampling bound needs the summand's value range, which only raw
    // data can provide.
    let summand = materialize(tse, &catalog)?;
    let summand = match range {
        Some(sub) => restrict(&summand, sub)?,
        None => summand,
    };
    let n = summand.values.len();
    let (lo, hi) = summand
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // A zero error target forces the estimator to look at every position:
    // sampling without replacement is exact only at m = n.
    let required =
        if epsilon == 0.0 { n } else { required_sample_size(n, epsilon, beta, (lo, hi))? };

    if json {
        println!(
            "{}",
            serde_json::json!({
                "command": "compare-sampling",
                "expr": expr,
                "stored_numbers": stored,
                "required_samples": required,
                "raw_points": n,
                "epsilon": epsilon,
                "beta": beta,
            })
        );
    } else {
        println!("stored_numbers={stored}");
        println!("required_samples={required}");
        println!("raw_points={n}");
        println!("epsilon={epsilon:.6}");
        println!("beta={beta:.6}");
    }
    Ok(())
}
