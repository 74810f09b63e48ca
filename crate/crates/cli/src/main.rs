use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rgm_cli::commands::{self, BundledData, CliError, EvaluateOptions, Measure, PairsDoc};
use rgm_cli::olympic::OlympicConfig;
use rgm_cli::report::{write_csv, Precision, ReportRow};
use rgm_cli::tradeoff_file::read_json;
use rgm_core::batch::Execution;
use rgm_core::data::Dataset;
use rgm_core::diagnostics::{self, Feasibility};
use rgm_core::lp::Settings;
use rgm_core::technology::Rts;

/// Efficiency scores and closest efficient targets from envelopment LPs.
#[derive(Parser)]
#[command(name = "maxrgm", version)]
struct Cli {
    /// LP feasibility tolerance (overrides MAXRGM_FEAS_TOL).
    #[arg(long, global = true)]
    feas_tol: Option<f64>,
    /// LP optimality tolerance (overrides MAXRGM_OPT_TOL).
    #[arg(long, global = true)]
    opt_tol: Option<f64>,
    /// Evaluate units one after another on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct TechArgs {
    /// Dataset CSV: dmu,name,x_*,y_*.
    #[arg(long)]
    dataset: PathBuf,
    /// Trade-off JSON document.
    #[arg(long)]
    tradeoffs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RtsArg::Vrs)]
    rts: RtsArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RtsArg {
    Vrs,
    Crs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Maxrgm,
    Fgl,
    FglModified,
    Russell,
}

#[derive(Subcommand)]
enum Command {
    /// Per-DMU scores and targets as CSV.
    Evaluate {
        #[command(flatten)]
        tech: TechArgs,
        #[arg(long, value_enum, default_value_t = MeasureArg::Maxrgm)]
        measure: MeasureArg,
        /// Evaluate even when facet positivity cannot be verified.
        #[arg(long)]
        force: bool,
        /// Print values unrounded.
        #[arg(long)]
        full_precision: bool,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Facet positivity multipliers and the free-lunch test.
    Diagnose {
        #[command(flatten)]
        tech: TechArgs,
        #[arg(long)]
        full_precision: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Ids of the strongly efficient DMUs.
    EfficientSet {
        #[command(flatten)]
        tech: TechArgs,
    },
    /// Trade-off utilities.
    Tradeoffs {
        #[command(subcommand)]
        command: TradeoffCommand,
    },
    /// Rerun the bundled case study and compare with its expected values.
    ReproduceOlympics {
        /// Directory holding the case-study files.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Write report.csv, diagnostics.txt and summary.txt here.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        full_precision: bool,
    },
}

#[derive(Subcommand)]
enum TradeoffCommand {
    /// Feasibility of a consistency system read from a pairs file.
    Check {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Emit the trade-off document generated from a case-study config.
    Olympic {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn precision(full: bool) -> Precision {
    if full {
        Precision::Full
    } else {
        Precision::Display
    }
}

fn load(args: &TechArgs, settings: Settings) -> Result<rgm_core::technology::Technology, CliError> {
    let rts = match args.rts {
        RtsArg::Vrs => Rts::VrsTo,
        RtsArg::Crs => Rts::Crs,
    };
    commands::load_technology(&args.dataset, args.tradeoffs.as_deref(), rts, settings)
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => commands::write_file(path, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

fn csv_bytes(rows: &[ReportRow]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(buf)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = commands::settings(cli.feas_tol, cli.opt_tol)?;
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Evaluate {
            tech,
            measure,
            force,
            full_precision,
            output,
        } => {
            let technology = load(&tech, settings)?;
            let measure = match measure {
                MeasureArg::Maxrgm => Measure::MaxRgm,
                MeasureArg::Fgl => Measure::Fgl,
                MeasureArg::FglModified => Measure::FglModified,
                MeasureArg::Russell => Measure::Russell,
            };
            let opts = EvaluateOptions {
                measure,
                force,
                precision: precision(full_precision),
                execution,
            };
            let rows = commands::evaluate(&technology, &opts)?;
            emit(output.as_deref(), &csv_bytes(&rows)?)
        }
        Command::Diagnose {
            tech,
            full_precision,
            json,
        } => {
            let technology = load(&tech, settings)?;
            let report = diagnostics::diagnose(&technology)?;
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).expect("serializable");
                commands::write_file(&path, text.as_bytes())?;
            }
            let text = commands::render_diagnostics(
                technology.dataset(),
                &report,
                precision(full_precision),
            );
            emit(None, text.as_bytes())
        }
        Command::EfficientSet { tech } => {
            let technology = load(&tech, settings)?;
            let ids = diagnostics::strong_efficient_set(&technology)?;
            let line: Vec<String> = ids.iter().map(usize::to_string).collect();
            emit(None, format!("{}\n", line.join(",")).as_bytes())
        }
        Command::Tradeoffs { command } => match command {
            TradeoffCommand::Check { dataset, pairs } => {
                let ds = Dataset::from_csv_path(&dataset)?;
                let doc: PairsDoc = read_json(&pairs)?;
                let verdict = match commands::check_pairs(&ds, &doc, &settings)? {
                    Feasibility::Feasible => "FEASIBLE\n",
                    Feasibility::Infeasible => "INFEASIBLE\n",
                };
                emit(None, verdict.as_bytes())
            }
            TradeoffCommand::Olympic {
                dataset,
                config,
                output,
            } => {
                let ds = Dataset::from_csv_path(&dataset)?;
                let config = OlympicConfig::read(&config)?;
                let spec = commands::olympic_tradeoffs(&ds, &config)?;
                emit(
                    output.as_deref(),
                    commands::tradeoffs_json(&spec).as_bytes(),
                )
            }
        },
        Command::ReproduceOlympics {
            data_dir,
            output_dir,
            full_precision,
        } => {
            let dir = data_dir.unwrap_or_else(BundledData::default_dir);
            let rep = commands::reproduce(&BundledData::in_dir(&dir), settings, execution)?;
            let precision = precision(full_precision);
            let report = csv_bytes(&rep.rows(precision))?;
            let diag =
                commands::render_diagnostics(rep.technology.dataset(), &rep.diagnostics, precision);
            let summary = rep.summary();
            if let Some(out) = output_dir {
                std::fs::create_dir_all(&out)
                    .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
                commands::write_file(&out.join("report.csv"), &report)?;
                commands::write_file(&out.join("diagnostics.txt"), diag.as_bytes())?;
                commands::write_file(&out.join("summary.txt"), summary.as_bytes())?;
            } else {
                emit(None, &report)?;
                emit(None, b"\n")?;
                emit(None, diag.as_bytes())?;
                emit(None, b"\n")?;
            }
            emit(None, summary.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
