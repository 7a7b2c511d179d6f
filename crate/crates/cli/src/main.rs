use std::fs::File;
use std::io::{self, BufReader, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use ptbundle_cli::batch::run_batch;
use ptbundle_cli::report::{error_value, Section, TOLERANCE_ENV};
use ptbundle_cli::text::render;
use ptbundle_cli::{parse_input, CliError, Pipeline, Settings};

/// Analysis of once-punctured-torus bundles with monodromy in SL(2, Z).
#[derive(Parser, Debug)]
#[command(name = "ptbundle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Monodromy as "a,b,c,d" for [[a, b], [c, d]].
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Twist word as "l1,m1;l2,m2;..." with an optional leading '-'.
    #[arg(long, allow_hyphen_values = true)]
    word: Option<String>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Args, Debug)]
struct Limits {
    /// Solver tolerance on the projected gradient (overrides PTB_TOLERANCE).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Fail if more minimal paths than this are found.
    #[arg(long)]
    max_paths: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conjugate the monodromy to its twist word.
    Factor(Common),
    /// The invariant Farey strip and its path count.
    Strip(Common),
    /// Saddle surfaces for every minimal path.
    Surfaces(Common),
    /// Characteristic submanifold summary per path.
    Guts(Common),
    /// Layered triangulation, geometric structure and volume.
    Volume(Common),
    /// Everything above.
    Analyze(Common),
    /// One analysis per line of FILE ("-" for stdin), as JSON lines.
    Batch {
        file: String,
        /// Accepted for symmetry; batch output is always JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        limits: Limits,
    },
}

fn settings(limits: &Limits) -> Result<Settings, CliError> {
    let env = std::env::var(TOLERANCE_ENV).ok();
    Settings::resolve(limits.tolerance, env.as_deref(), limits.max_paths)
}

const HEADER: [&str; 4] = ["tool", "input", "tolerances", "notes"];

fn single(common: &Common, sections: &[Section]) -> Result<(), CliError> {
    let settings = settings(&common.limits)?;
    let input = parse_input(common.matrix.as_deref(), common.word.as_deref())?;
    let doc = Pipeline::new(input, settings)?.document(sections)?;
    let mut out = io::stdout().lock();
    if common.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
    } else {
        let mut order: Vec<&str> = HEADER.to_vec();
        order.extend(sections.iter().map(|s| s.key()));
        write!(out, "{}", render(&doc, &order))?;
    }
    Ok(())
}

fn batch(file: &str, limits: &Limits) -> Result<(), CliError> {
    let settings = settings(limits)?;
    let docs: Vec<Value> = if file == "-" {
        run_batch(io::stdin().lock(), &settings)?
    } else {
        run_batch(BufReader::new(File::open(file)?), &settings)?
    };
    let mut out = io::stdout().lock();
    for d in docs {
        writeln!(out, "{d}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Factor(c) => single(c, &[Section::Factorization]),
        Command::Strip(c) => single(c, &[Section::Strip]),
        Command::Surfaces(c) => single(c, &[Section::Surfaces]),
        Command::Guts(c) => single(c, &[Section::Guts]),
        Command::Volume(c) => single(c, &[Section::Volume]),
        Command::Analyze(c) => single(c, &Section::ALL),
        Command::Batch { file, limits, .. } => batch(file, limits),
    }
}

fn wants_json(cli: &Cli) -> bool {
    match &cli.command {
        Command::Factor(c)
        | Command::Strip(c)
        | Command::Surfaces(c)
        | Command::Guts(c)
        | Command::Volume(c)
        | Command::Analyze(c) => c.json,
        Command::Batch { .. } => true,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = wants_json(&cli);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // The reader went away (for example `| head`); nothing left to report.
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                let doc = serde_json::to_string_pretty(&error_value(&e)).expect("json");
                let _ = writeln!(io::stdout(), "{doc}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
