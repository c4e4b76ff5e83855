use std::io::Write;
use std::num::NonZeroUsize;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frobdyn::{
    census_json, census_status, census_text, element_arg, exit_code, field_from_args,
    fiber_report, map_point, orbit_report, point_arg, run_census, to_json, verify, CliError, Coords,
    VerifyConfig,
};
use frobdyn_core::FieldElement;

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "frobdyn", version, about = "Verify the Frobenius quadric map over GF(2^m) and explore its dynamics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Extension degree m of GF(2^m).
    #[arg(long = "field", default_value_t = 16)]
    degree: u32,
    /// Irreducible modulus in hex, leading bit included (default: the smallest one).
    #[arg(long)]
    modulus: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoordArg {
    Y,
    Z,
}

impl From<CoordArg> for Coords {
    fn from(c: CoordArg) -> Self {
        match c {
            CoordArg::Y => Coords::Y,
            CoordArg::Z => Coords::Z,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the series pipeline for random and explicit (mu, omega) pairs.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        /// Curve parameter mu (hex). With --omega, adds one explicit trial.
        #[arg(long)]
        mu: Option<String>,
        /// Deformation parameter omega (hex), not 0 or 1.
        #[arg(long)]
        omega: Option<String>,
        /// Series truncation: coefficients below t^N are computed.
        #[arg(long, default_value_t = 128)]
        trunc: i64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<NonZeroUsize>,
    },
    /// Evaluate the quadric map at a point.
    Map {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "0")]
        mu: String,
        /// Point a:b:c:d with hex coordinates.
        #[arg(long)]
        point: String,
        /// Coordinates of the input point.
        #[arg(long, value_enum, default_value = "y")]
        coords: CoordArg,
        /// Coordinates of the output point.
        #[arg(long = "out-coords", value_enum, default_value = "z")]
        out_coords: CoordArg,
    },
    /// Rational preimages of a z-coordinate point under the quadric map.
    Fiber {
        #[command(flatten)]
        field: FieldArgs,
        /// Accepted for symmetry with the other subcommands; the fiber does
        /// not depend on it.
        #[arg(long, default_value = "0")]
        mu: String,
        #[arg(long)]
        point: String,
    },
    /// Preperiod and period of a point under the Frobenius step.
    Orbit {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "0")]
        mu: String,
        /// Starting point a:b:c:d in z-coordinates.
        #[arg(long)]
        start: String,
        /// Give up after this many steps (default: number of points of P^3).
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Classify every point of P^3 and tabulate fibers and periods.
    Census {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "0")]
        mu: String,
        #[arg(long)]
        workers: Option<NonZeroUsize>,
    },
}

struct Output {
    text: String,
    code: u8,
}

fn mu_arg(field: &FieldArgs, mu: &str) -> Result<FieldElement, CliError> {
    let f = field_from_args(field.degree, field.modulus.as_deref())?;
    element_arg(f, "--mu", mu)
}

fn pick(fmt: Option<Format>, default: Format, json: impl FnOnce() -> String, text: impl FnOnce() -> String) -> String {
    match fmt.unwrap_or(default) {
        Format::Json => json(),
        Format::Text => text(),
    }
}

fn run(cmd: Cmd) -> Result<Output, CliError> {
    match cmd {
        Cmd::Verify { field, mu, omega, trunc, trials, seed, workers } => {
            let f = field_from_args(field.degree, field.modulus.as_deref())?;
            let mu = mu.map(|m| element_arg(f, "--mu", &m)).transpose()?;
            let omega = omega.map(|w| element_arg(f, "--omega", &w)).transpose()?;
            let cert = verify(&VerifyConfig { field: f, mu, omega, precision: trunc, trials, seed, workers })?;
            let text = pick(field.format, Format::Json, || cert.to_json(), || cert.to_text());
            Ok(Output { text, code: exit_code(cert.overall) })
        }
        Cmd::Map { field, mu, point, coords, out_coords } => {
            let mu = mu_arg(&field, &mu)?;
            let p = point_arg(mu.field(), "--point", &point)?;
            let r = map_point(mu, &p, coords.into(), out_coords.into());
            let code = if r.ok() { 0 } else { 1 };
            let text = pick(field.format, Format::Text, || to_json(&r), || r.text());
            Ok(Output { text, code })
        }
        Cmd::Fiber { field, mu, point } => {
            let mu = mu_arg(&field, &mu)?;
            let p = point_arg(mu.field(), "--point", &point)?;
            let r = fiber_report(&p);
            let text = pick(field.format, Format::Text, || to_json(&r), || r.text());
            Ok(Output { text, code: 0 })
        }
        Cmd::Orbit { field, mu, start, max_steps } => {
            let mu = mu_arg(&field, &mu)?;
            let p = point_arg(mu.field(), "--start", &start)?;
            let r = orbit_report(mu, &p, max_steps);
            let code = if r.ok() { 0 } else { 1 };
            let text = pick(field.format, Format::Text, || to_json(&r), || r.text());
            Ok(Output { text, code })
        }
        Cmd::Census { field, mu, workers } => {
            let mu = mu_arg(&field, &mu)?;
            let workers = workers.map_or_else(
                || std::thread::available_parallelism().map_or(1, |n| n.get()),
                |n| n.get(),
            );
            let r = run_census(mu, workers)?;
            let text = pick(field.format, Format::Json, || census_json(&r), || census_text(&r));
            Ok(Output { text, code: exit_code(census_status(&r)) })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.text.trim_end());
            ExitCode::from(out.code)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
