use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use apartlearn::learner::Variant;
use apartlearn::oracle::{EqOracleConfig, OracleKind};
use apartlearn_bench::{
    aggregate, render_summary, run_experiment, write_rows, BenchError, EventRecord, ExperimentSpec,
    Format, GeneratorParams, MetricsRow, ModelSource, PolicyKind,
};
use clap::{Parser, ValueEnum};

/// Learn Mealy machines with a simulated teacher and report query counts.
#[derive(Debug, Parser)]
#[command(name = "learn", version)]
struct Args {
    /// Target machine in DOT format; may be repeated.
    #[arg(long, value_name = "PATH", required_unless_present = "random")]
    model: Vec<PathBuf>,
    /// Random target, e.g. n=20,k=3,p=3; may be repeated.
    #[arg(long, value_name = "n=N,k=K,p=P")]
    random: Vec<GeneratorParams>,
    #[arg(long, value_enum, default_value_t = VariantArg::Plain)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Strategic)]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = OracleArg::Exact)]
    oracle: OracleArg,
    /// Random-walk oracle: extra states assumed beyond the hypothesis.
    #[arg(long, default_value_t = EqOracleConfig::default().extra_states)]
    extra_states: usize,
    /// Random-walk oracle: maximal length of the random infix.
    #[arg(long, default_value_t = EqOracleConfig::default().infix_length)]
    infix: usize,
    /// Random-walk oracle: test words per equivalence query.
    #[arg(long, default_value_t = EqOracleConfig::default().budget)]
    budget: usize,
    /// Abort a run after this many learning output queries.
    #[arg(long)]
    max_queries: Option<u64>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics file; rows go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write one JSON line per rule application to stderr.
    #[arg(long)]
    verbose: bool,
    /// Record wall-clock time per run (makes the output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Plain,
    Ads,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Strategic,
    Any,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleArg {
    Exact,
    Randomwalk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl Args {
    fn spec(&self) -> ExperimentSpec {
        let models = self
            .model
            .iter()
            .cloned()
            .map(ModelSource::Dot)
            .chain(self.random.iter().copied().map(ModelSource::Random))
            .collect();
        ExperimentSpec {
            models,
            variant: match self.variant {
                VariantArg::Plain => Variant::Plain,
                VariantArg::Ads => Variant::Ads,
            },
            policy: match self.policy {
                PolicyArg::Strategic => PolicyKind::Strategic,
                PolicyArg::Any => PolicyKind::Any,
            },
            oracle: EqOracleConfig {
                kind: match self.oracle {
                    OracleArg::Exact => OracleKind::Exact,
                    OracleArg::Randomwalk => OracleKind::RandomWalk,
                },
                extra_states: self.extra_states,
                infix_length: self.infix,
                budget: self.budget,
                seed: self.seed,
            },
            max_output_queries: self.max_queries,
            repeats: self.repeats,
            seed: self.seed,
            record_events: self.verbose,
            timing: self.timing,
        }
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    let outcomes = run_experiment(&args.spec())?;
    if args.verbose {
        let mut err = io::stderr().lock();
        for o in &outcomes {
            for event in &o.events {
                let record = EventRecord {
                    model: &o.row.model,
                    repeat: o.repeat,
                    event,
                };
                serde_json::to_writer(&mut err, &record).map_err(anyhow::Error::from)?;
                writeln!(err).map_err(anyhow::Error::from)?;
            }
        }
    }
    let rows: Vec<MetricsRow> = outcomes.into_iter().map(|o| o.row).collect();
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let summary = render_summary(&aggregate(&rows));
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| BenchError::Io {
                path: path.clone(),
                source,
            })?;
            write_rows(&rows, format, BufWriter::new(file))?;
            print!("{summary}");
        }
        None => {
            write_rows(&rows, format, io::stdout().lock())?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

enum Failure {
    Bench(BenchError),
    Other(anyhow::Error),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        Failure::Bench(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("APARTLEARN_LOG", "warn"))
        .init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (kind, message, code) = match failure {
                Failure::Bench(e) => (
                    e.kind(),
                    e.to_string(),
                    if e.is_input_error() { 2 } else { 1 },
                ),
                Failure::Other(e) => ("io", format!("{e:#}"), 1),
            };
            eprintln!(
                "{}",
                serde_json::json!({ "error": kind, "message": message })
            );
            ExitCode::from(code)
        }
    }
}
