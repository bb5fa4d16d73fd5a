mod input;
mod report;

use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indeptest::correlation::correlation_summary;
use indeptest::decision::{decide, TestKind};
use indeptest::distributions::Probability;
use indeptest::oracle::run_identity_suite;
use indeptest::simulation::{
    completed_cells, rows_to_json, run_table_with, write_csv_row, CellKey, Preset, SimulationSpec, TableRow,
    CSV_HEADER,
};
use indeptest::StatisticReport;

use input::{describe, read_dataset};
use report::{TestEntry, TestOutput};

/// Tests of complete independence based on sums of squared sample correlations.
#[derive(Debug, Parser)]
#[command(name = "indeptest", version)]
struct Cli {
    /// Worker threads for simulations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the tests on a CSV data file (rows = observations, columns = variables).
    Test(TestArgs),
    /// Estimate size or power by simulation.
    Simulate(SimulateArgs),
    /// Check the finite-sample moment identities by Monte Carlo.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    /// Size: rho = 0 over n in {15,30,60,100,200}, p in {3,10,20,50,100,200}.
    Table1,
    /// Power: rho = 0.02 over the same grid.
    Table2,
}

#[derive(Debug, Args)]
struct Common {
    /// Comma-separated subset of t_star, T_star, t_c, T_c.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    tests: Option<Vec<TestKind>>,

    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TestArgs {
    input: PathBuf,

    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, conflicts_with_all = ["n", "p", "rho"])]
    preset: Option<PresetArg>,

    #[arg(long, requires = "p")]
    n: Option<usize>,

    #[arg(long, requires = "n")]
    p: Option<usize>,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rho: f64,

    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    #[arg(long, default_value_t = 10_000)]
    reps: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Skip cells already present in the CSV given by --output and append the rest.
    #[arg(long, requires = "output")]
    resume: bool,

    /// Suppress per-cell progress on stderr.
    #[arg(long)]
    quiet: bool,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1_000_000)]
    reps: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    Validation,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Validation => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(path: Option<&Path>, e: io::Error) -> Failure {
    match path {
        Some(p) => Failure::Data(format!("{}: {e}", p.display())),
        None => Failure::Data(e.to_string()),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(Some(path), e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| io_failure(None, e)),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn level(alpha: f64) -> Result<Probability<f64>, Failure> {
    Probability::level(alpha).map_err(|e| Failure::Usage(format!("--alpha: {e}")))
}

fn cmd_test(args: TestArgs) -> Outcome {
    let alpha = level(args.alpha)?;
    let file = File::open(&args.input).map_err(|e| io_failure(Some(&args.input), e))?;
    let data = read_dataset(BufReader::new(file))
        .map_err(|e| Failure::Data(format!("{}: {e}", args.input.display())))?;
    let corr = correlation_summary(&data.data)
        .map_err(|e| Failure::Data(format!("{}: {}", args.input.display(), describe(&e, &data.names))))?;
    let tests = args.common.tests.unwrap_or_else(|| TestKind::ALL.to_vec());
    let decisions = tests
        .into_iter()
        .map(|kind| match decide(kind, &corr, alpha) {
            Ok(d) => TestEntry::Decision(d),
            Err(e) => TestEntry::Failed { test_name: kind, error: describe(&e, &data.names) },
        })
        .collect();
    let out = TestOutput {
        n: corr.n(),
        p: corr.p(),
        columns: data.names,
        alpha: args.alpha,
        statistics: StatisticReport::compute(&corr),
        decisions,
    };
    let text = match args.format {
        Format::Text => report::test_text(&out),
        Format::Csv => report::test_csv(&out),
        Format::Json => json(&out),
    };
    emit(args.common.output.as_deref(), &text)
}

fn simulation_grid(args: &SimulateArgs) -> Result<Vec<SimulationSpec<f64>>, Failure> {
    level(args.alpha)?;
    let mut grid = match (args.preset, args.n, args.p) {
        (Some(PresetArg::Table1), _, _) => Preset::Size.grid(args.alpha, args.reps, args.seed),
        (Some(PresetArg::Table2), _, _) => Preset::Power.grid(args.alpha, args.reps, args.seed),
        (None, Some(n), Some(p)) => vec![SimulationSpec::new(n, p, args.rho, args.alpha, args.reps, args.seed)],
        _ => return Err(Failure::Usage("simulate needs --preset or both --n and --p".into())),
    };
    if let Some(tests) = &args.common.tests {
        grid = grid.into_iter().map(|s| s.with_tests(tests.clone())).collect();
    }
    Ok(grid)
}

fn cmd_simulate(args: SimulateArgs) -> Outcome {
    let grid = simulation_grid(&args)?;
    let output = args.common.output.as_deref();
    let total = grid.len();
    let progress = |idx: usize, rows: &[TableRow<f64>]| {
        if args.quiet {
            return;
        }
        let spec = &grid[idx];
        let status = rows.iter().find_map(|r| r.error.as_deref()).unwrap_or("done");
        eprintln!("[{}/{total}] n={} p={} rho={}: {status}", idx + 1, spec.n, spec.p, spec.rho);
    };

    if args.format != Format::Csv {
        if args.resume {
            return Err(Failure::Usage("--resume needs --format csv".into()));
        }
        let mut progress = progress;
        let rows = run_table_with(&grid, |_| false, &mut progress);
        let text = match args.format {
            Format::Json => {
                let mut s = rows_to_json(&rows);
                s.push('\n');
                s
            }
            _ => report::table_text(&rows),
        };
        return emit(output, &text);
    }

    // CSV is written cell by cell so an interrupted run can be resumed.
    let done = match (args.resume, output) {
        (true, Some(path)) if path.exists() => {
            let file = File::open(path).map_err(|e| io_failure(Some(path), e))?;
            completed_cells(BufReader::new(file)).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?
        }
        _ => Default::default(),
    };
    let mut sink: Box<dyn Write> = match output {
        Some(path) => {
            let file = if args.resume && path.exists() {
                OpenOptions::new().append(true).open(path)
            } else {
                File::create(path)
            };
            Box::new(file.map_err(|e| io_failure(Some(path), e))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let fresh = !(args.resume && output.is_some_and(Path::exists));
    if fresh {
        writeln!(sink, "{CSV_HEADER}").map_err(|e| io_failure(output, e))?;
    }
    let mut write_error = None;
    run_table_with(
        &grid,
        |s| done.contains(&CellKey::of(s)),
        |idx, rows| {
            for r in rows {
                if let Err(e) = write_csv_row(r, &mut sink) {
                    write_error.get_or_insert(e);
                }
            }
            if let Err(e) = sink.flush() {
                write_error.get_or_insert(e);
            }
            progress(idx, rows);
        },
    );
    match write_error {
        Some(e) => Err(io_failure(output, e)),
        None => Ok(()),
    }
}

fn cmd_validate(args: ValidateArgs) -> Outcome {
    let checks = run_identity_suite(args.reps, args.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    let text = match args.format {
        Format::Text => report::checks_text(&checks),
        Format::Csv => report::checks_csv(&checks),
        Format::Json => json(&checks),
    };
    emit(args.output.as_deref(), &text)?;
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(Failure::Usage(format!("--threads: {e}"))),
        },
        None => run(cli),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Data(m) => eprintln!("error: {m}"),
                Failure::Validation => eprintln!("error: some identities exceeded their tolerance"),
            }
            ExitCode::from(f.code())
        }
    }
}
