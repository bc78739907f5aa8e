use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ipt_tank_cli::{cmd_equiv, cmd_solve, cmd_sweep, cmd_verify, EquivSource, SweepArgs};

/// Design and verification of S-SP compensation networks for inductive
/// power transfer.
#[derive(Parser)]
#[command(name = "ipt-tank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve C_p, C_ss, C_sp and the CV frequency; writes solution.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify CC and CV operation of a design; writes report_cc.json and report_cv.json.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Design block or solve output. Defaults to the config's capacitors.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frequency/load sweep; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        design: Option<PathBuf>,
        /// Lower frequency in Hz (default 0.2·f_cc).
        #[arg(long)]
        fmin: Option<f64>,
        /// Upper frequency in Hz (default 5·f_cc).
        #[arg(long)]
        fmax: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the tank-route and unified-route resonance conditions.
    Equiv(EquivArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct EquivSelect {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of seeded random operating points per mode.
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Args)]
struct EquivArgs {
    #[command(flatten)]
    source: EquivSelect,
    #[arg(long, requires = "config")]
    design: Option<PathBuf>,
    #[arg(long, default_value_t = 42, requires = "random")]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, out } => cmd_solve(&config, out.as_deref()),
        Command::Verify { config, design, out } => cmd_verify(&config, design.as_deref(), out.as_deref()),
        Command::Sweep {
            config,
            design,
            fmin,
            fmax,
            points,
            out,
        } => cmd_sweep(
            &config,
            design.as_deref(),
            SweepArgs { fmin, fmax, points },
            out.as_deref(),
        ),
        Command::Equiv(a) => {
            let source = match (a.source.config, a.source.random) {
                (Some(config), _) => EquivSource::Config {
                    config,
                    design: a.design,
                },
                (None, Some(draws)) => EquivSource::Random { draws, seed: a.seed },
                (None, None) => unreachable!("clap enforces one source"),
            };
            cmd_equiv(&source, a.out.as_deref())
        }
    };
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
