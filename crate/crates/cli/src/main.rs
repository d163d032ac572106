use std::fs::{self, File};
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use composite_core::ingest::{self, parse_timestamp, MessageContext};
use composite_core::report::{self, emit_dot, emit_json, emit_markdown, parse_report, render_stats_tables};
use composite_core::testkit::synth::{self, SynthConfig};
use composite_core::{detect, FilterConfig, IngestError, RefactoringRecord, ReportBundle};
use log::{info, warn};

/// Detects composite refactorings in streams of single refactorings.
#[derive(Debug, Parser)]
#[command(name = "composite-miner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster single refactorings into composites and write reports.
    Detect(DetectArgs),
    /// Print the frequency table and distributions of a JSON report.
    Stats(StatsArgs),
    /// Generate a seeded dataset with planted composites.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
    MinerText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Emit {
    Json,
    Markdown,
    Dot,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    /// Project name for miner-text input.
    #[arg(long)]
    project: Option<String>,
    /// Commit hash for miner-text input.
    #[arg(long)]
    commit: Option<String>,
    /// Commit timestamp for miner-text input.
    #[arg(long)]
    timestamp: Option<String>,
    /// Output directory. Defaults to the current directory when `--emit` is given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifacts to write. Defaults to all three when `--out` is given.
    #[arg(long, value_enum)]
    emit: Vec<Emit>,
    /// Drop the built-in test/sample/docs package exclusions.
    #[arg(long)]
    no_default_filters: bool,
    #[arg(long = "exclude-package", value_name = "FRAGMENT")]
    exclude_package: Vec<String>,
    #[arg(long)]
    keep_constructors: bool,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    min_size: u64,
    /// Fixed `generated_at` value, for reproducible reports.
    #[arg(long, value_name = "ISO8601")]
    pin_timestamp: Option<String>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    singles: usize,
    /// `kind=weight,...`; every kind weighs 1 when omitted.
    #[arg(long)]
    composite_mix: Option<String>,
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[arg(long, default_value_t = 0.15)]
    multi_commit: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Failure {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn io(path: &Path, err: io::Error) -> Failure {
        Failure {
            code: 2,
            message: format!("{}: {err}", path.display()),
        }
    }

    fn ingest(path: &Path, err: IngestError) -> Failure {
        let code = if err.is_io() { 2 } else { 1 };
        Failure {
            code,
            message: format!("{}: {err}", path.display()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COMPOSITE_MINER_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("composite-miner: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path, e))
}

fn read_records(args: &DetectArgs) -> Result<Vec<RefactoringRecord>, Failure> {
    let input = open(&args.input)?;
    let fail = |e| Failure::ingest(&args.input, e);
    let parsed = match args.format {
        Format::Jsonl => return ingest::parse_jsonl(input).map_err(fail),
        Format::Csv => ingest::parse_oracle_csv(input).map_err(fail)?,
        Format::MinerText => {
            let (Some(project), Some(commit)) = (&args.project, &args.commit) else {
                return Err(Failure::usage("miner-text input requires --project and --commit"));
            };
            let timestamp = args
                .timestamp
                .as_deref()
                .map(parse_timestamp)
                .transpose()
                .map_err(Failure::usage)?;
            let ctx = MessageContext {
                project: project.clone(),
                commit: commit.clone(),
                timestamp,
            };
            ingest::parse_miner_text(input, &ctx).map_err(fail)?
        }
    };
    for (reason, count) in &parsed.skipped {
        warn!("skipped {count} unsupported `{reason}` entries");
    }
    Ok(parsed.records)
}

fn filter_config(args: &DetectArgs) -> Result<FilterConfig, Failure> {
    let mut cfg = if args.no_default_filters {
        FilterConfig::none()
    } else {
        FilterConfig::default()
    };
    cfg.exclude_constructors = !args.keep_constructors;
    for fragment in &args.exclude_package {
        cfg.exclude_fragment(fragment).map_err(Failure::usage)?;
    }
    Ok(cfg)
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn cmd_detect(args: DetectArgs) -> Outcome {
    let generated_at = match &args.pin_timestamp {
        Some(text) => parse_timestamp(text).map_err(Failure::usage)?,
        None => chrono::Utc::now(),
    };
    let filters = filter_config(&args)?;
    let records = read_records(&args)?;
    info!("ingested {} records from {}", records.len(), args.input.display());

    let detection = detect(&records, &filters, args.min_size as usize);
    let d = detection.dropped;
    info!(
        "dropped {} records (project {}, package {}, constructor {})",
        d.total(),
        d.project,
        d.package,
        d.constructor
    );
    let bundle = ReportBundle::build(
        &records,
        &detection.singles,
        detection.composites,
        filters,
        generated_at,
    )
    .map_err(Failure::usage)?;

    let mut emit = args.emit.clone();
    if emit.is_empty() && args.out.is_some() {
        emit = vec![Emit::Json, Emit::Markdown, Emit::Dot];
    }
    emit.sort();
    emit.dedup();
    if !emit.is_empty() {
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
        for kind in emit {
            match kind {
                Emit::Json => write(&dir.join("report.json"), &emit_json(&bundle))?,
                Emit::Markdown => write(&dir.join("report.md"), &emit_markdown(&bundle))?,
                Emit::Dot => {
                    for (i, c) in bundle.composites.iter().enumerate() {
                        write(&dir.join(report::dot_file_name(c, i + 1)), &emit_dot(c))?;
                    }
                }
            }
        }
    }

    let stats = &bundle.stats;
    println!(
        "{} singles, {} composites, {:.1}% coverage",
        stats.singles_total, stats.composite_total, stats.singles_in_composites_percent
    );
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Outcome {
    let text = fs::read_to_string(&args.report).map_err(|e| Failure::io(&args.report, e))?;
    let doc = parse_report(&text).map_err(|e| Failure::usage(format!("{}: {e}", args.report.display())))?;
    print!("{}", render_stats_tables(&doc.stats));
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Outcome {
    let mut cfg = SynthConfig::new(args.seed, args.singles);
    cfg.noise = args.noise;
    cfg.multi_commit = args.multi_commit;
    if let Some(mix) = &args.composite_mix {
        cfg.mix = synth::parse_mix(mix).map_err(Failure::usage)?;
    }
    let dataset = synth::generate(&cfg).map_err(Failure::usage)?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let mut jsonl = Vec::new();
    ingest::write_jsonl(&dataset.records, &mut jsonl).expect("writing to memory cannot fail");
    write(
        &args.out.join("dataset.jsonl"),
        &String::from_utf8(jsonl).expect("jsonl is UTF-8"),
    )?;
    let mut truth = serde_json::to_string_pretty(&dataset.truth).expect("ground truth serializes");
    truth.push('\n');
    write(&args.out.join("ground_truth.json"), &truth)?;
    println!(
        "{} records, {} planted composites, {} noise records",
        dataset.records.len(),
        dataset.truth.planted.len(),
        dataset.truth.noise_records
    );
    Ok(())
}
