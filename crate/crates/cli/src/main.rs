use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use schauder_cli::{emit_report, exit_status, parse_config, run_command, CliError, Format, RunOptions, COMMANDS};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Output {
    Text,
    Machine,
}

/// Verify frame identities for a job described in a JSON config.
#[derive(Parser, Debug)]
#[command(name = "schauder", version)]
struct Args {
    /// Path to the JSON config, or "-" for stdin.
    #[arg(required_unless_present = "list_commands")]
    config: Option<String>,

    /// Residual threshold (overrides the config).
    #[arg(long)]
    tolerance: Option<f64>,

    /// Seed for "seeded-random" pairs without an explicit seed.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, value_enum, default_value = "text")]
    output: Output,

    /// Cross-check the adjoint lattice with explicit matrix commutators.
    #[arg(long)]
    verify_adjoint_by_matrices: bool,

    /// Print every command name and exit.
    #[arg(long)]
    list_commands: bool,
}

fn read_config(path: &str) -> Result<String, CliError> {
    let io = |source| CliError::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_commands {
        for (_, name, summary) in COMMANDS {
            println!("{name:<24} {summary}");
        }
        return ExitCode::SUCCESS;
    }
    let path = args.config.as_deref().expect("clap requires config");
    let opts = RunOptions {
        tolerance: args.tolerance,
        seed: args.seed,
        verify_adjoint_by_matrices: args.verify_adjoint_by_matrices,
    };
    let format = match args.output {
        Output::Text => Format::Text,
        Output::Machine => Format::Machine,
    };
    let result = read_config(path)
        .and_then(|text| parse_config(&text))
        .and_then(|cfg| run_command(&cfg, &opts));
    match result {
        Ok(report) => {
            print!("{}", emit_report(&report, format));
            ExitCode::from(exit_status(&report) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
