use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ultraspherical::diagnostics::{
    cauchy_error_study, conditioning_study, geometric_grid, q_tail_study, rounding_error_study,
    total_error_study, write_csv_to, CauchyFactor, DiagnosticsRecord, ExperimentConfig,
};
use ultraspherical::problem::airy_problem;
use ultraspherical::{assemble, qr_factor, Error, ProblemSpec};

/// Ultraspherical spectral method for linear ODEs on [-1, 1]: solves and
/// error/conditioning studies written as CSV.
#[derive(Parser, Debug)]
#[command(name = "usm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve at one truncation size and print the Chebyshev coefficients, one per line.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Truncation size.
        #[arg(long)]
        n: usize,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Total error against the reference solution.
    StudyTotal(StudyArgs),
    /// Rounding error of the binary64 solve.
    StudyRounding(StudyArgs),
    /// Cauchy error between sizes n and ceil(n * factor).
    StudyCauchy(StudyArgs),
    /// Tail norms of the leading rows of Q; prints the largest tail ratio to stderr.
    StudyQtail(StudyArgs),
    /// Normwise and componentwise condition numbers.
    StudyCond(StudyArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ProblemArgs {
    /// Built-in Airy problem mu u'' - x u = 0 with boundary values Ai(-+(1/mu)^(1/3)).
    #[arg(long, value_name = "MU")]
    airy: Option<String>,
    /// Problem definition file.
    #[arg(long, value_name = "PATH")]
    problem: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Smallest truncation size of the geometric grid.
    #[arg(long, default_value_t = 16)]
    n_min: usize,
    /// Largest truncation size of the geometric grid.
    #[arg(long)]
    n_max: usize,
    /// Ratio between consecutive grid sizes.
    #[arg(long, default_value_t = 1.1)]
    n_factor: f64,
    /// Cauchy factor as an exact decimal.
    #[arg(long, default_value = "1.01")]
    cauchy_factor: String,
    /// Significand bits of the reference precision (256, 512 or 1024).
    #[arg(long, default_value_t = 256)]
    precision_bits: usize,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Problem(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Problem(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Problem(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::Parse { .. }
            | Error::InvalidProblem(_)
            | Error::SizeTooSmall { .. }
            | Error::UnsupportedPrecision(_)
            | Error::DimensionMismatch(_)
            | Error::DenseCutoff { .. }
            | Error::OutOfRange(_) => Failure::Problem(m),
            Error::Io(_) => Failure::Io(m),
            Error::ZeroPivot { .. }
            | Error::Singular { .. }
            | Error::BoundInapplicable(_)
            | Error::Undefined(_)
            | Error::MissingReference(_) => Failure::Numerical(m),
        }
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn load(args: &ProblemArgs) -> Result<ProblemSpec, Failure> {
    match (&args.airy, &args.problem) {
        (Some(mu), _) => Ok(airy_problem(mu)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            ProblemSpec::parse(&text)
                .map_err(|e| Failure::Problem(format!("{}: {e}", path.display())))
        }
        (None, None) => Err(Failure::Problem("no problem given".into())),
    }
}

fn emit(
    out: &Option<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Failure>,
) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let mut w = io::BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(io_failure)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush().map_err(io_failure)
        }
    }
}

fn config(args: &StudyArgs) -> Result<ExperimentConfig, Failure> {
    let spec = load(&args.problem)?;
    let grid = geometric_grid(args.n_min, args.n_max, args.n_factor)?;
    let mut cfg = ExperimentConfig::new(spec, grid).with_reference_bits(args.precision_bits)?;
    cfg.cauchy_factor = CauchyFactor::parse(&args.cauchy_factor)?;
    Ok(cfg)
}

fn write_records(args: &StudyArgs, records: &[DiagnosticsRecord]) -> Result<(), Failure> {
    emit(&args.out, |w| Ok(write_csv_to(records, w)?))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { problem, n, out } => {
            let p = load(&problem)?.instantiate::<f64>()?;
            let sys = assemble(&p, n)?;
            let u = qr_factor(&sys.a)?.solve(&sys.f)?;
            emit(&out, |w| {
                for c in &u {
                    writeln!(w, "{c:e}").map_err(io_failure)?;
                }
                Ok(())
            })
        }
        Command::StudyTotal(args) => write_records(&args, &total_error_study(&config(&args)?)?),
        Command::StudyRounding(args) => {
            write_records(&args, &rounding_error_study(&config(&args)?)?)
        }
        Command::StudyCauchy(args) => write_records(&args, &cauchy_error_study(&config(&args)?)?),
        Command::StudyCond(args) => write_records(&args, &conditioning_study(&config(&args)?)?),
        Command::StudyQtail(args) => {
            let study = q_tail_study(&config(&args)?)?;
            match study.sigma {
                Some(s) => eprintln!("sigma = {s:e}"),
                None => eprintln!("sigma undefined: every tail underflowed"),
            }
            write_records(&args, &study.records)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("usm: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
