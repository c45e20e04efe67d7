mod commands;
mod error;
mod output;
mod samples;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use w2interp::TestFunction;

use commands::{run, Command, RunConfig};
use error::CliResult;
use output::Format;

/// Optimal interpolation in W2^(m,m-1)(0,1) on equally spaced nodes.
///
/// Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "w2interp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Space order m >= 1
    #[arg(long, global = true)]
    m: Option<usize>,

    /// Number of node intervals N (h = 1/N)
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Evaluation point in [0, 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    z: Option<f64>,

    /// Number of equispaced evaluation points on [0, 1] (default 201)
    #[arg(long, global = true)]
    zgrid: Option<usize>,

    /// Built-in test function
    #[arg(long, global = true, value_name = "sq|exp2|sin")]
    function: Option<TestFunction>,

    /// Sample file with header `x,value`
    #[arg(long, global = true)]
    samples: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    output: Format,

    /// Output file (default: standard output)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        RunConfig {
            command: c.command,
            m: c.m,
            n: c.n,
            z: c.z,
            zgrid: c.zgrid,
            function: c.function,
            samples_path: c.samples,
            output_format: c.output,
            out_path: c.out,
        }
    }
}

fn execute(cfg: &RunConfig) -> CliResult<()> {
    let outcome = run(cfg)?;
    let sink: Box<dyn Write> = match &cfg.out_path {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    outcome.table.write(cfg.output_format, &mut sink)?;
    sink.flush()?;
    for line in &outcome.stderr {
        eprintln!("{line}");
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cfg = RunConfig::from(Cli::parse());
    match execute(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_grammar() {
        let c = Cli::try_parse_from(["w2interp", "coeffs", "--m", "2", "--n", "5", "--z", "0.4", "--output", "json"]).unwrap();
        let cfg = RunConfig::from(c);
        assert_eq!(cfg.command, Command::Coeffs);
        assert_eq!((cfg.m, cfg.n, cfg.z), (Some(2), Some(5), Some(0.4)));
        assert_eq!(cfg.output_format, Format::Json);
    }

    #[test]
    fn unknown_function_is_rejected() {
        let e = Cli::try_parse_from(["w2interp", "interp", "--function", "cos"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
