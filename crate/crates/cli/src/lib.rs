//! Batch front end: fit, predict, score and search from JSON specs and
//! CSV/SVMlight data files.

pub mod spec;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use estk::persistence::{self, Archive};
use estk::{
    decode_label, Dataset, Error, Features, Registry, SearchResult, SparseMatrix, TargetColumn,
};

pub use spec::{PipelineSpec, SearchSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_FIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "estk",
    version,
    about = "Fit, apply and tune estimators from declarative specs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the spec's estimator and write a model archive.
    Fit {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Archive to write.
        #[arg(long)]
        model: PathBuf,
        /// Overrides every random seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write one prediction per input row as single-column CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the model's default score on labelled data.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Also write the score to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the spec's search block, write the refit best model and a report.
    Search {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Per-candidate CSV report.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV with a header row, or SVMlight (`.svm`, `.svmlight`, `.libsvm`).
    #[arg(long)]
    pub data: PathBuf,
    /// CSV target column, by header name or 0-based index.
    #[arg(long)]
    pub target_column: Option<String>,
}

/// A command failure: exit code plus message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn invalid(e: Error) -> Failure {
    Failure::new(EXIT_INVALID, e.to_string())
}

fn data_error(e: Error) -> Failure {
    Failure::new(EXIT_DATA, e.to_string())
}

/// Errors raised while fitting or applying a model.
fn run_error(e: Error) -> Failure {
    let code = match e.root() {
        Error::Capability { .. }
        | Error::NotFitted { .. }
        | Error::UnknownKind(_)
        | Error::UnknownParam { .. }
        | Error::ParamType { .. }
        | Error::ParamPath { .. } => EXIT_INVALID,
        Error::Shape(_) | Error::Ingest { .. } | Error::Io(_) => EXIT_DATA,
        _ => EXIT_FIT,
    };
    Failure::new(code, e.to_string())
}

/// Runs a parsed command; returns the process exit code after reporting
/// any failure on standard error.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Fit {
            spec,
            data,
            model,
            seed,
        } => cmd_fit(&spec, &data, &model, seed),
        Command::Predict { model, data, out } => cmd_predict(&model, &data, &out),
        Command::Score { model, data, out } => cmd_score(&model, &data, out.as_deref()),
        Command::Search {
            spec,
            data,
            model,
            report,
            seed,
        } => cmd_search(&spec, &data, model.as_deref(), &report, seed),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Reads and validates a spec without touching any data.
pub fn read_spec(path: &Path, seed: Option<u64>) -> Outcome<PipelineSpec> {
    let text = fs::read_to_string(path).map_err(|e| {
        Failure::new(
            EXIT_INVALID,
            format!("cannot read spec {}: {e}", path.display()),
        )
    })?;
    let mut spec = PipelineSpec::from_json(&text, Registry::global()).map_err(invalid)?;
    if let Some(seed) = seed {
        spec.reseed(seed).map_err(invalid)?;
    }
    Ok(spec)
}

fn target_column(arg: &Option<String>) -> Option<TargetColumn> {
    arg.as_deref().map(|s| match s.parse::<usize>() {
        Ok(i) => TargetColumn::Index(i),
        Err(_) => TargetColumn::Name(s.to_string()),
    })
}

fn is_svmlight(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("svm" | "svmlight" | "libsvm")
    )
}

/// Loads a data file. For SVMlight, `--target-column` is implied.
pub fn read_data(args: &DataArgs) -> Outcome<Dataset> {
    if is_svmlight(&args.data) {
        estk::load_svmlight(&args.data).map_err(data_error)
    } else {
        estk::load_csv(&args.data, true, target_column(&args.target_column)).map_err(data_error)
    }
}

fn read_model(path: &Path) -> Outcome<Archive> {
    persistence::load_archive(path, Registry::global()).map_err(|e| {
        Failure::new(
            EXIT_DATA,
            format!("cannot load model {}: {e}", path.display()),
        )
    })
}

/// SVMlight files only span the highest index present; pad to the fitted
/// width so sparse inputs line up.
fn align_width(x: Features, expected: Option<usize>) -> Outcome<Features> {
    let (Some(expected), Features::Sparse(s)) = (expected, &x) else {
        return Ok(x);
    };
    if s.n_cols() >= expected {
        return Ok(x);
    }
    SparseMatrix::from_csr(
        s.n_rows(),
        expected,
        s.indptr().to_vec(),
        s.indices().to_vec(),
        s.data().to_vec(),
    )
    .map(Features::Sparse)
    .map_err(data_error)
}

fn check_width(x: &Features, expected: Option<usize>) -> Outcome<()> {
    match expected {
        Some(e) if !matches!(x, Features::Documents(_)) && x.n_cols() != e => Err(Failure::new(
            EXIT_DATA,
            format!(
                "feature count mismatch: model expects {e} features, data has {}",
                x.n_cols()
            ),
        )),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Outcome<()> {
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_DATA, format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_fit(
    spec_path: &Path,
    data: &DataArgs,
    model_out: &Path,
    seed: Option<u64>,
) -> Outcome<()> {
    let spec = read_spec(spec_path, seed)?;
    let mut estimator = spec.estimator;
    if estimator.capabilities().supervised
        && data.target_column.is_none()
        && !is_svmlight(&data.data)
    {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("{} is supervised; pass --target-column", estimator.kind()),
        ));
    }
    let ds = read_data(data)?;
    estimator.fit(&ds.x, ds.y.as_deref()).map_err(run_error)?;
    let bytes = persistence::to_bytes(&estimator, ds.target_names.as_deref()).map_err(run_error)?;
    write_file(model_out, &bytes)
}

pub fn cmd_predict(model: &Path, data: &DataArgs, out: &Path) -> Outcome<()> {
    let archive = read_model(model)?;
    let estimator = &archive.estimator;
    if !estimator.capabilities().predictor {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("{} does not support predict", estimator.kind()),
        ));
    }
    let ds = read_data(data)?;
    let x = align_width(ds.x, archive.metadata.n_features)?;
    check_width(&x, archive.metadata.n_features)?;
    let predictions = estimator.predict(&x).map_err(run_error)?;
    let names = archive.metadata.target_names.as_deref();
    let mut text = String::from("prediction\n");
    for p in predictions {
        text.push_str(&csv_field(&decode_label(names, p)));
        text.push('\n');
    }
    write_file(out, text.as_bytes())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Re-expresses the file's targets in the model's label encoding.
fn align_targets(ds: &Dataset, model_names: Option<&[String]>) -> Outcome<Option<Vec<f64>>> {
    let (Some(y), Some(names)) = (&ds.y, model_names) else {
        return Ok(ds.y.clone());
    };
    y.iter()
        .map(|&v| {
            let label = ds.decode_label(v);
            names
                .iter()
                .position(|n| *n == label)
                .map(|i| i as f64)
                .ok_or_else(|| {
                    Failure::new(
                        EXIT_DATA,
                        format!("label `{label}` was not seen during training"),
                    )
                })
        })
        .collect::<Outcome<Vec<_>>>()
        .map(Some)
}

pub fn cmd_score(model: &Path, data: &DataArgs, out: Option<&Path>) -> Outcome<()> {
    let archive = read_model(model)?;
    let ds = read_data(data)?;
    let y = align_targets(&ds, archive.metadata.target_names.as_deref())?;
    let x = align_width(ds.x, archive.metadata.n_features)?;
    check_width(&x, archive.metadata.n_features)?;
    let score = archive
        .estimator
        .score(&x, y.as_deref())
        .map_err(run_error)?;
    println!("{score}");
    match out {
        Some(path) => write_file(path, format!("score\n{score}\n").as_bytes()),
        None => Ok(()),
    }
}

pub fn cmd_search(
    spec_path: &Path,
    data: &DataArgs,
    model_out: Option<&Path>,
    report_out: &Path,
    seed: Option<u64>,
) -> Outcome<()> {
    let spec = read_spec(spec_path, seed)?;
    let mut search = spec
        .search_cv()
        .ok_or_else(|| Failure::new(EXIT_INVALID, "spec has no `search` block"))?;
    if model_out.is_some() && !search.refit {
        return Err(Failure::new(
            EXIT_INVALID,
            "--model needs refit enabled in the search block",
        ));
    }
    let ds = read_data(data)?;
    search.fit(&ds.x, ds.y.as_deref()).map_err(run_error)?;
    let result = search.result().map_err(run_error)?;
    write_file(report_out, report(result).as_bytes())?;
    if let (Some(path), Some(best)) = (model_out, &result.best_estimator_) {
        let bytes = persistence::to_bytes(best, ds.target_names.as_deref()).map_err(run_error)?;
        write_file(path, &bytes)?;
    }
    Ok(())
}

/// One row per candidate: index, parameter columns (first-seen order),
/// `split{i}_score` columns, `mean_score`, `is_best`.
pub fn report(result: &SearchResult) -> String {
    let mut keys: Vec<&str> = Vec::new();
    for c in &result.candidates {
        for k in c.keys() {
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    let n_folds = result.fold_scores.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["candidate".into()];
    header.extend(keys.iter().map(|k| format!("param_{k}")));
    header.extend((0..n_folds).map(|f| format!("split{f}_score")));
    header.extend(["mean_score".into(), "is_best".into()]);
    w.write_record(&header).expect("writing to memory");
    for (i, c) in result.candidates.iter().enumerate() {
        let mut row: Vec<String> = vec![i.to_string()];
        row.extend(
            keys.iter()
                .map(|k| c.get(k).map(|v| v.to_string()).unwrap_or_default()),
        );
        row.extend(result.fold_scores[i].iter().map(|s| format!("{s:?}")));
        row.push(format!("{:?}", result.mean_scores[i]));
        row.push((i == result.best_index_).to_string());
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}
