use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hdsched::generate::Topology;
use hdsched::scheduler::Method;
use hdsched_cli::{cmd_gen, cmd_solve, cmd_sweep, cmd_verify, CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "hdsched",
    version,
    about = "Simple schedules for half-duplex relay networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    General,
    Diamond,
}

impl From<TopologyArg> for Topology {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::General => Topology::General,
            TopologyArg::Diamond => Topology::Diamond,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    CuttingPlane,
    Oracle,
}

impl From<ModeArg> for Method {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exhaustive => Method::Exhaustive,
            ModeArg::CuttingPlane => Method::CuttingPlane,
            ModeArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network file.
    Gen {
        #[arg(long)]
        relays: usize,
        #[arg(long, value_enum)]
        topology: TopologyArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a network file with one method.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check every method against the oracle.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a batch of generated networks.
    Sweep {
        #[arg(long)]
        relays: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum)]
        topology: TopologyArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen {
            relays,
            topology,
            seed,
            out,
        } => {
            cmd_gen(relays, topology.into(), seed, &out)?;
        }
        Command::Solve {
            input,
            mode,
            tol,
            out,
        } => {
            cmd_solve(&input, mode.into(), tol, &out)?;
        }
        Command::Verify { input, out } => {
            cmd_verify(&input, &out)?;
        }
        Command::Sweep {
            relays,
            count,
            topology,
            seed,
            mode,
            out,
        } => {
            cmd_sweep(relays, count, topology.into(), seed, mode.into(), &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // bad flags count as unparseable input
            let err = CliError::Parse(e.render().to_string().trim_end().to_owned());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
