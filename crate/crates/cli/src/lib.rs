//! The `platform-rater` command line: catalog inspection, assessment
//! reports, rankings and the HTTP service.

use std::fmt::Write as _;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::ffi::OsString;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::{DeserializeOwned, IgnoredAny};
use serde_json::error::Category;

use platform_rater_core::catalog::Severity;
use platform_rater_core::export::{layers_csv, ranking_csv, report_csv};
use platform_rater_core::{
    filter_criteria, lint_catalog, load_catalog, AssessmentProject, Catalog, ConsistencyConfig,
    Dimension, Layer, RankingInput, RankingResult, SatisfactionReport, Store,
};
use platform_rater_service::{router, AppState};

#[derive(Parser)]
#[command(name = "platform-rater", version, about = "Assess and rank IoT platforms")]
struct Cli {
    /// Criteria catalog to use instead of the bundled one.
    #[arg(long, global = true, env = "PLATFORM_RATER_CATALOG", value_name = "FILE")]
    catalog: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the criteria catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Work with single-platform assessment projects.
    #[command(subcommand)]
    Assess(AssessCommand),
    /// Rank platforms from pairwise judgments.
    Rank(RankArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List criteria, optionally filtered.
    List {
        #[arg(long, value_parser = parse_dimension)]
        dimension: Option<Dimension>,
        #[arg(long, value_parser = parse_layer)]
        layer: Option<Layer>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Check the catalog against the automatable meta-criteria.
    Lint {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum AssessCommand {
    /// Score a saved project file.
    Report {
        #[arg(long, value_name = "FILE")]
        project: PathBuf,
        /// Write per-criterion scores as CSV.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Write per-layer scores as CSV.
        #[arg(long, value_name = "FILE")]
        layers_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(clap::Args)]
struct RankArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Write the full result as JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the ranking as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long, env = "PLATFORM_RATER_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Data directory (defaults to $PLATFORM_RATER_DATA, then ./data).
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Directory of UI assets served at `/`.
    #[arg(long, value_name = "DIR")]
    static_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

fn parse_dimension(s: &str) -> Result<Dimension, String> {
    s.parse().map_err(|e: platform_rater_core::CatalogError| e.to_string())
}

fn parse_layer(s: &str) -> Result<Layer, String> {
    s.parse().map_err(|e: platform_rater_core::CatalogError| e.to_string())
}

/// A failed command: validation problems exit 1, I/O and syntax problems exit 3.
enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 3,
        }
    }
}

fn json_failure(path: &Path, e: serde_json::Error) -> Failure {
    let msg = format!("{}: {e}", path.display());
    match e.classify() {
        Category::Data => Failure::Invalid(msg),
        Category::Syntax | Category::Eof | Category::Io => Failure::Io(msg),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Syntax is checked first so a malformed file is never reported as a schema error.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let source = read_text(path)?;
    serde_json::from_str::<IgnoredAny>(&source).map_err(|e| json_failure(path, e))?;
    serde_json::from_str(&source).map_err(|e| json_failure(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_active_catalog(path: Option<&Path>) -> Result<Catalog, Failure> {
    let Some(path) = path else {
        return Ok(Catalog::bundled());
    };
    let source = read_text(path)?;
    serde_json::from_str::<IgnoredAny>(&source).map_err(|e| json_failure(path, e))?;
    load_catalog(&source).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i + 1 == row.len() {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{cell:<width$}  ", width = widths[i]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn report_table(report: &SatisfactionReport) -> String {
    let rows: Vec<Vec<String>> = report
        .criteria
        .iter()
        .map(|c| {
            vec![
                c.criterion_id.clone(),
                opt(c.raw),
                opt(c.normalized),
                format!("{}/{}", c.answered, c.total),
            ]
        })
        .collect();
    let mut out = table(&["CRITERION", "RAW", "NORMALIZED", "ANSWERED"], &rows);
    let layers: Vec<Vec<String>> = report
        .layers
        .iter()
        .map(|(l, s)| {
            vec![
                l.as_str().to_string(),
                format!("{:.4}", s.score),
                format!("{:.4}", s.coverage),
            ]
        })
        .collect();
    out.push('\n');
    out.push_str(&table(&["LAYER", "SCORE", "COVERAGE"], &layers));
    out
}

fn ranking_table(result: &RankingResult) -> String {
    let rows: Vec<Vec<String>> = result
        .ranking
        .iter()
        .map(|r| {
            vec![
                r.rank.to_string(),
                r.platform.clone(),
                format!("{:.4}", r.composite_weight),
            ]
        })
        .collect();
    table(&["RANK", "PLATFORM", "COMPOSITE"], &rows)
}

fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let mut emit = |text: &str| {
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Failure::Io(format!("stdout: {e}")))
    };
    match cli.command {
        Command::Catalog(CatalogCommand::List {
            dimension,
            layer,
            format,
        }) => {
            let catalog = load_active_catalog(cli.catalog.as_deref())?;
            let criteria = filter_criteria(&catalog, dimension, layer);
            match format {
                Format::Json => emit(&to_json(&criteria)),
                Format::Table => {
                    let rows: Vec<Vec<String>> = criteria
                        .iter()
                        .map(|c| {
                            vec![
                                c.id.clone(),
                                c.dimension.as_str().to_string(),
                                c.layers()
                                    .iter()
                                    .map(|l| l.as_str())
                                    .collect::<Vec<_>>()
                                    .join(","),
                                c.questions.len().to_string(),
                                c.name.clone(),
                            ]
                        })
                        .collect();
                    emit(&table(&["ID", "DIMENSION", "LAYERS", "QUESTIONS", "NAME"], &rows))
                }
            }
        }
        Command::Catalog(CatalogCommand::Lint { format }) => {
            let catalog = load_active_catalog(cli.catalog.as_deref())?;
            let findings = lint_catalog(&catalog);
            match format {
                Format::Json => emit(&to_json(&findings))?,
                Format::Table => {
                    let rows: Vec<Vec<String>> = findings
                        .iter()
                        .map(|f| {
                            vec![
                                format!("{:?}", f.rule),
                                format!("{:?}", f.severity).to_lowercase(),
                                f.subject.clone(),
                                f.message.clone(),
                            ]
                        })
                        .collect();
                    emit(&table(&["RULE", "SEVERITY", "SUBJECT", "MESSAGE"], &rows))?
                }
            }
            let errors = findings
                .iter()
                .filter(|f| f.severity == Severity::Error)
                .count();
            if errors > 0 {
                return Err(Failure::Invalid(format!("{errors} lint error(s)")));
            }
            Ok(())
        }
        Command::Assess(AssessCommand::Report {
            project,
            out,
            layers_out,
            format,
        }) => {
            let catalog = load_active_catalog(cli.catalog.as_deref())?;
            let parsed: AssessmentProject = read_json(&project)?;
            parsed
                .validate(&catalog)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", project.display())))?;
            let report = parsed.satisfaction_report(&catalog);
            if let Some(path) = out {
                write_file(&path, &report_csv(&report))?;
            }
            if let Some(path) = layers_out {
                write_file(&path, &layers_csv(&report))?;
            }
            match format {
                Format::Json => emit(&to_json(&report)),
                Format::Table => emit(&report_table(&report)),
            }
        }
        Command::Rank(args) => {
            let input: RankingInput = read_json(&args.input)?;
            let result = input
                .evaluate(&ConsistencyConfig::default())
                .map_err(|e| {
                    let mut lines = Vec::new();
                    for issue in &e.issues {
                        if issue.issues.is_empty() {
                            lines.push(format!("[{}] {}", issue.matrix, issue.message));
                        }
                        for i in &issue.issues {
                            lines.push(format!("[{}] {i}", issue.matrix));
                        }
                    }
                    Failure::Invalid(format!("invalid ranking input\n  {}", lines.join("\n  ")))
                })?;
            for w in &result.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            if let Some(path) = &args.out {
                write_file(path, &to_json(&result))?;
            }
            if let Some(path) = &args.csv {
                write_file(path, &ranking_csv(&result))?;
            }
            match args.format {
                Format::Json => emit(&to_json(&result)),
                Format::Table => emit(&ranking_table(&result)),
            }
        }
        Command::Serve(args) => {
            serve(cli.catalog.as_deref(), args, out)
        }
    }
}

fn serve(catalog: Option<&Path>, args: ServeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let catalog = load_active_catalog(catalog)?;
    let data = args.data.unwrap_or_else(Store::root_from_env);
    let store = Store::open(&data).map_err(|e| Failure::Io(e.to_string()))?;
    let app = router(AppState::new(catalog, store), args.static_dir);

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    runtime.block_on(async move {
        let addr = SocketAddr::new(args.host, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::Io(format!("cannot bind {addr}: {e}")))?;
        let bound = listener
            .local_addr()
            .map_err(|e| Failure::Io(e.to_string()))?;
        let _ = writeln!(out, "listening on http://{bound}");
        let _ = out.flush();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        platform_rater_service::serve(listener, app, shutdown)
            .await
            .map_err(|e| Failure::Io(e.to_string()))
    })
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 success, 1 invalid data, 2 usage, 3 I/O or malformed JSON.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return e.exit_code() as u8;
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(failure) => {
            let msg = match &failure {
                Failure::Invalid(m) | Failure::Io(m) => m,
            };
            let _ = writeln!(err, "error: {msg}");
            failure.code()
        }
    }
}
