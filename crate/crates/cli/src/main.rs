//! `curfit fit` ranks every model family on a CSV; `curfit serve` runs the HTTP API.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use curfit_core::{
    auto_train, build_result_document, format_equation, parse_csv, plot_series, select_columns,
    split_dataset, DocumentContext, Error, ModelFamily, PlotSeries, RankedModels, ResultDocument,
    DEFAULT_ORDER, DEFAULT_SEED, DEFAULT_TEST_PERCENT,
};
use curfit_service::{resolve_port, ServiceConfig, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(
    name = "curfit",
    version,
    about = "Least-squares curve fitting with automatic model ranking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit all six model families to a CSV file and rank them by training r².
    Fit(FitArgs),
    /// Serve the HTTP API (and the web front end, if built).
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Document,
}

#[derive(Debug, clap::Args)]
struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated feature column names.
    #[arg(long, value_delimiter = ',', required = true)]
    features: Vec<String>,
    /// Label column name.
    #[arg(long)]
    label: String,
    /// Percentage of rows held out for testing.
    #[arg(long, default_value_t = DEFAULT_TEST_PERCENT)]
    test_split: f64,
    /// Seed for the train/test shuffle.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Polynomial order (1-10).
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: u32,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Also write per-family plot data (JSON) to this path.
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ServeArgs {
    /// Port to listen on; 0 picks a free port. CURFIT_PORT takes precedence.
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Directory of built web front-end assets.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

/// A failure with the exit status it maps to.
struct Failure {
    status: u8,
    message: String,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

impl Failure {
    fn new(status: u8, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::UnknownColumn(_)
            | Error::LabelInFeatures(_)
            | Error::DuplicateFeature(_)
            | Error::NoFeatures
            | Error::InvalidTestPercent(_)
            | Error::EmptyTrain
            | Error::InvalidOrder(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        let mut message = err.to_string();
        if let Error::AllFamiliesFailed(failures) = &err {
            for (family, e) in failures {
                let _ = write!(message, "\n  {family}: {e}");
            }
        }
        Self { status, message }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => run_fit(&args),
        Command::Serve(args) => run_serve(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("curfit: error: {}", f.message);
            ExitCode::from(f.status)
        }
    }
}

fn run_fit(args: &FitArgs) -> Result<(), Failure> {
    let bytes = std::fs::read(&args.input).map_err(|e| {
        Failure::new(
            EXIT_FAILURE,
            format!("cannot read {}: {e}", args.input.display()),
        )
    })?;
    let dataset = parse_csv(&bytes)?;
    let selection = select_columns(&dataset, &args.features, &args.label)?;
    let split = split_dataset(&dataset, &selection, args.test_split, args.seed)?;
    let ranked = auto_train(&split, args.order)?;

    let name = args.input.file_name().map_or_else(
        || args.input.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    let document = build_result_document(
        &ranked,
        &DocumentContext::new(name, &dataset, &split, args.order),
    );

    if let Some(path) = &args.plot_out {
        let plots: BTreeMap<ModelFamily, PlotSeries> = ranked
            .entries
            .iter()
            .filter_map(|e| Some((e.family, plot_series(e.model()?, &split.train).ok()?)))
            .collect();
        let json = serde_json::to_string_pretty(&plots).expect("plot data serializes");
        std::fs::write(path, json + "\n").map_err(|e| {
            Failure::new(
                EXIT_FAILURE,
                format!("cannot write {}: {e}", path.display()),
            )
        })?;
    }

    let text = match args.format {
        Format::Document => document.to_json() + "\n",
        Format::Table => render_table(&document, &ranked),
    };
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot write output: {e}")))
}

fn r2_cell(r2: Option<f64>) -> String {
    r2.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"))
}

/// One line per family, best first: `rank  family  equation  train_r2  test_r2`.
fn render_table(doc: &ResultDocument, ranked: &RankedModels) -> String {
    let mut out = String::new();
    let split = &doc.split;
    let _ = writeln!(
        out,
        "# {}: {} rows ({} dropped), label {}, {} train / {} test ({}% test, seed {}), polynomial order {}",
        doc.dataset.name,
        doc.dataset.rows,
        doc.dataset.dropped_rows,
        doc.selection.label,
        split.train_rows,
        split.test_rows,
        split.test_percent,
        split.seed,
        doc.order,
    );
    let features = &doc.selection.features;
    let legend = if features.len() == 1 {
        format!("x = {}", features[0])
    } else {
        let numbered: Vec<String> = features
            .iter()
            .enumerate()
            .map(|(j, f)| format!("x{} = {f}", j + 1))
            .collect();
        format!(
            "{}; simple, polynomial and sinusoidal use x = {}",
            numbered.join(", "),
            features[0]
        )
    };
    let _ = writeln!(out, "# {legend}");
    let _ = writeln!(out, "# rank  family  equation  train_r2  test_r2");
    for (rank, (entry, model)) in ranked.entries.iter().zip(&doc.models).enumerate() {
        match entry.model() {
            Some(fitted) => {
                let _ = write!(
                    out,
                    "{}  {}  {}  {}  {}",
                    rank + 1,
                    entry.family,
                    format_equation(fitted),
                    r2_cell(model.train_r2),
                    r2_cell(model.test_r2),
                );
                if let Some(note) = &model.test_error {
                    let _ = write!(out, "  (test: {note})");
                }
                out.push('\n');
            }
            None => {
                let _ = writeln!(
                    out,
                    "{}  {}  failed: {}",
                    rank + 1,
                    entry.family,
                    model.error.as_deref().unwrap_or("unknown error")
                );
            }
        }
    }
    out
}

fn run_serve(args: ServeArgs) -> Result<(), Failure> {
    let port = resolve_port(args.port).map_err(|m| Failure::new(EXIT_USAGE, m))?;
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("static directory {} does not exist", dir.display()),
            ));
        }
    }
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();

    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let addr = SocketAddr::new(args.host, port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot listen on {addr}: {e}")))?;
        let bound = listener
            .local_addr()
            .map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
        println!("curfit listening on http://{bound}");
        let _ = std::io::stdout().flush();
        let config = ServiceConfig {
            static_dir: args.static_dir,
            ..ServiceConfig::default()
        };
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        curfit_service::serve(listener, config, shutdown)
            .await
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("server error: {e}")))
    })
}
