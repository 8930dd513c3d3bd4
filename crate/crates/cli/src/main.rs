use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use specgap_cli::{exit_code, run, summary, to_json, CliError, RunConfig, EXIT_CONFIG};

/// Intertwining lower bounds on spectral gaps, cross-checked by a grid oracle.
#[derive(Debug, Parser)]
#[command(name = "specgap", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long, env = "SPECGAP_CONFIG")]
    config: PathBuf,
    /// Output directory (overrides `output.dir`); the report goes to stdout when unset.
    #[arg(long, env = "SPECGAP_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for the oracle (defaults to all cores).
    #[arg(long, env = "SPECGAP_THREADS")]
    threads: Option<usize>,
    /// Write stiffness, masses and eigenvectors as CSV.
    #[arg(long, env = "SPECGAP_DUMP_MATRICES")]
    dump_matrices: bool,
    /// Seed for randomised start vectors and sample points (overrides `seed`).
    #[arg(long, env = "SPECGAP_SEED")]
    seed: Option<u64>,
}

fn execute(args: Args) -> Result<i32, CliError> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(out) = args.out {
        cfg.output.dir = Some(out);
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    cfg.output.dump_matrices |= args.dump_matrices;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let report = run(&cfg)?;
    eprintln!("{}", summary(&report));
    if cfg.output.dir.is_none() {
        println!("{}", to_json(&report)?);
    }
    Ok(exit_code(&report))
}

fn main() -> ExitCode {
    // clap's own failure status (2) would collide with the violation code.
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = match execute(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_CONFIG as u8))
}
