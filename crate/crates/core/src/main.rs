use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irs_cep::harness::{
    complexity, format_table, run_validation, simulate, write_csv, ComplexityCase, ScenarioFile,
    Sweep, SweepParam, DEFAULT_SEED,
};
use irs_cep::{Error, Result};

#[derive(Parser)]
#[command(version, about = "IRS-aided multi-cell massive-MIMO constant-envelope precoding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: single-cell-small, multicell-desk or full-scale.
    #[arg(long)]
    preset: Option<String>,
    /// CSV destination; defaults to the scenario's `output`, `-` for stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scheme of a scenario and write one CSV row per trial and scheme.
    Simulate(Source),
    /// As `simulate`, with the sweep axis given on the command line.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Swept dimension: M, K or NT.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// Operation counts of trellis, SDR and exhaustive search.
    Complexity {
        /// `N_T,M,T,B,N_BS,N_IRS`; repeatable. Defaults to the two reference rows.
        #[arg(long)]
        case: Vec<ComplexityCase>,
    },
    /// Run the oracle suite.
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// SDP sandwich tolerance.
        #[arg(long, default_value_t = 1e-6)]
        sdp_tol: f64,
    },
}

fn load(source: &Source) -> Result<ScenarioFile> {
    let mut sc = match (&source.config, &source.preset) {
        (Some(path), _) => ScenarioFile::load(path)?,
        (None, Some(name)) => ScenarioFile::preset(name)?,
        (None, None) => return Err(Error::Scenario("--config or --preset is required".into())),
    };
    if let Some(seed) = source.seed {
        sc.system.seed = seed;
    }
    if let Some(trials) = source.trials {
        sc.system.mc_trials = trials;
    }
    Ok(sc)
}

fn run_scenario(source: &Source, sc: &ScenarioFile) -> Result<()> {
    sc.validate()?;
    let out = source
        .out
        .clone()
        .or_else(|| sc.output.clone())
        .ok_or_else(|| Error::Scenario("no output path (--out or `output`)".into()))?;
    let rows = simulate(sc)?;
    if out.as_os_str() == "-" {
        write_csv(&rows, io::stdout().lock())?;
    } else {
        let mut w = BufWriter::new(File::create(&out)?);
        write_csv(&rows, &mut w)?;
        w.flush()?;
        eprintln!("wrote {} rows to {}", rows.len(), out.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(source) => {
            let sc = load(&source)?;
            run_scenario(&source, &sc)?;
        }
        Command::Sweep {
            source,
            param,
            values,
        } => {
            let mut sc = load(&source)?;
            sc.sweep = Some(Sweep { param, values });
            run_scenario(&source, &sc)?;
        }
        Command::Complexity { case } => {
            let cases = if case.is_empty() {
                ComplexityCase::reference().to_vec()
            } else {
                case
            };
            let rows: Vec<_> = cases.iter().map(complexity).collect();
            print!("{}", format_table(&rows));
        }
        Command::Validate { seed, sdp_tol } => {
            if !(sdp_tol.is_finite() && sdp_tol > 0.0) {
                return Err(Error::InvalidConfig {
                    field: "sdp_tol",
                    reason: "must be finite and > 0".into(),
                });
            }
            let report = run_validation(seed, sdp_tol)?;
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
