//! `chartdesc`: describe charts, inspect a labelled corpus, evaluate reader
//! rankings.
//!
//! Errors go to stderr as `{"error": {"kind": ..., "message": ...}}`. Exit
//! status is 0 on success, 1 for bad input, 2 for internal failures.

mod config;
mod error;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chartdesc::corpus::{self, Facet};
use chartdesc::rankstats;
use chartdesc::realize::{compose_description, ComposeOptions, Style, Templates};
use chartdesc::tabular::{load_table, TableFormat, TableSource};
use chartdesc::{parse_spec, validate_spec, Level};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "chartdesc",
    version,
    about = "Level-tagged chart descriptions and their evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a chart from its specification and data.
    Describe(DescribeArgs),
    /// Statistics over a level-labelled description corpus.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Friedman and Nemenyi analysis of reader rankings.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DescribeArgs {
    /// Chart specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Dataset (CSV or JSON); overrides the data named in the spec.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated levels to generate, from 1, 2, 3 [default: 1,2,3].
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u8>>,
    #[arg(long, value_enum)]
    style: Option<StyleArg>,
    #[arg(long, value_enum, default_value = "text")]
    format: DescribeFormat,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Natural,
    Templatized,
}

#[derive(Clone, Copy, ValueEnum)]
enum DescribeFormat {
    Text,
    Json,
    Html,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Sentence, description and chart counts plus the level distribution.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        facet: Option<FacetArg>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Level sequence of every description of one chart.
    Fingerprint {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        chart: String,
        #[arg(long, value_enum, default_value = "text")]
        format: FingerprintFormat,
    },
    /// Chart counts by type, topic and difficulty.
    Breakdown {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Re-emit the corpus as CSV or JSON Lines.
    Export {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ExportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FacetArg {
    ChartType,
    Topic,
    Difficulty,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FingerprintFormat {
    Text,
    Json,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct EvalArgs {
    /// Rankings CSV: reader_id,group,chart_id,item,rank.
    #[arg(long)]
    rankings: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::new("usage", e.render().to_string().trim());
            eprintln!("{}", err.to_json());
            return ExitCode::from(1);
        }
    };
    let result = std::panic::catch_unwind(|| run(cli)).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unexpected failure".into());
        Err(CliError::internal(message))
    });
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Describe(args) => describe(args),
        Command::Corpus(cmd) => corpus_command(cmd),
        Command::Eval(args) => eval(args),
    }
}

fn read_file(path: &Path, kind: &'static str) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(kind, format!("cannot read {}: {e}", path.display())))
}

fn parse_levels(raw: &[u8]) -> Result<Vec<Level>, CliError> {
    let mut levels = Vec::new();
    for &n in raw {
        let level = match n {
            1..=3 => Level::try_from(n).expect("1-3 are levels"),
            4 => {
                return Err(CliError::new(
                    "usage",
                    "level 4 (contextual) content cannot be generated; choose from 1, 2, 3",
                ))
            }
            other => {
                return Err(CliError::new(
                    "usage",
                    format!("unknown level {other}; choose from 1, 2, 3"),
                ))
            }
        };
        if !levels.contains(&level) {
            levels.push(level);
        }
    }
    if levels.is_empty() {
        return Err(CliError::new("usage", "no levels requested"));
    }
    levels.sort();
    Ok(levels)
}

fn describe(args: DescribeArgs) -> Result<String, CliError> {
    let config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let levels = parse_levels(
        args.levels
            .as_deref()
            .or(config.levels.as_deref())
            .unwrap_or(&[1, 2, 3]),
    )?;
    let style = match args.style {
        Some(StyleArg::Natural) => Style::Natural,
        Some(StyleArg::Templatized) => Style::Templatized,
        None => config.style.unwrap_or_default(),
    };
    let templates = match &config.template_file {
        Some(path) => Templates::load_overrides(path)?,
        None => Templates::builtin(),
    };

    let spec_text = read_file(&args.spec, "spec-not-found")?;
    let spec = parse_spec(&spec_text)?;
    let data = match &args.data {
        Some(path) => load_table(TableSource::Path(path), TableFormat::from_path(path))?,
        None => spec.load_data(args.spec.parent())?,
    };
    let chart = validate_spec(spec, data)?;
    let options = ComposeOptions {
        templates,
        trends: config.trends,
    };
    let description = compose_description(&chart, &levels, style, &options)?;
    Ok(match args.format {
        DescribeFormat::Text => output::description_text(&description),
        DescribeFormat::Json => output::description_json(&description, &levels, style),
        DescribeFormat::Html => {
            output::description_html(&description, chart.spec().title.as_deref())
        }
    })
}

fn corpus_command(cmd: CorpusCommand) -> Result<String, CliError> {
    match cmd {
        CorpusCommand::Stats {
            corpus,
            facet,
            format,
        } => {
            let c = corpus::load_corpus(&corpus)?;
            let facet = facet.map(|f| match f {
                FacetArg::ChartType => Facet::ChartType,
                FacetArg::Topic => Facet::Topic,
                FacetArg::Difficulty => Facet::Difficulty,
            });
            let rows = if c.is_empty() {
                Vec::new()
            } else {
                corpus::level_distribution(&c, facet)?
            };
            Ok(match format {
                ReportFormat::Text => output::stats_text(&c, &rows),
                ReportFormat::Json => output::stats_json(&c, facet, &rows),
            })
        }
        CorpusCommand::Fingerprint {
            corpus,
            chart,
            format,
        } => {
            let c = corpus::load_corpus(&corpus)?;
            let rows = corpus::fingerprint(&c, &chart)?;
            Ok(match format {
                FingerprintFormat::Text => corpus::fingerprint_text(&rows),
                FingerprintFormat::Svg => corpus::fingerprint_svg(&chart, &rows),
                FingerprintFormat::Json => output::versioned_json(serde_json::json!({
                    "chart_id": chart,
                    "descriptions": rows,
                })),
            })
        }
        CorpusCommand::Breakdown { corpus, format } => {
            let c = corpus::load_corpus(&corpus)?;
            let b = corpus::curation_breakdown(&c);
            Ok(match format {
                ReportFormat::Text => output::breakdown_text(&b),
                ReportFormat::Json => {
                    output::versioned_json(serde_json::to_value(&b).expect("breakdown serializes"))
                }
            })
        }
        CorpusCommand::Export { corpus, format } => {
            let c = corpus::load_corpus(&corpus)?;
            match format {
                ExportFormat::Csv => Ok(corpus::export_csv(&c)?),
                ExportFormat::Jsonl => Ok(corpus::export_jsonl(&c)),
            }
        }
    }
}

fn eval(args: EvalArgs) -> Result<String, CliError> {
    let text = read_file(&args.rankings, "rankings-not-found")?;
    let responses = rankstats::parse_rankings_csv(&text)?;
    let reports = rankstats::evaluate(&responses, args.alpha)?;
    Ok(match args.format {
        ReportFormat::Text => output::eval_text(&reports),
        ReportFormat::Json => output::versioned_json(serde_json::json!({
            "alpha": args.alpha,
            "groups": reports,
        })),
    })
}
