use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kgsim_cli::{commands, exit, CliError, FreeDecayArgs, MultiFreqArgs};

#[derive(Parser)]
#[command(name = "kgsim", version, about = "Klein-Gordon fields with concentrated nonlinearities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config: evolve, record diagnostics, write outputs.
    Simulate {
        config: PathBuf,
        /// Overwrite an output directory that belongs to a different config.
        #[arg(long)]
        force: bool,
    },
    /// Run several configs concurrently, each into its own directory.
    Batch {
        configs: Vec<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Solitary amplitudes at a frequency.
    Solitary {
        #[arg(long)]
        mass: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        /// Potential coefficients u_0,u_1,...,u_p of U = Σ u_l |ψ|^{2l}.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Vec<f64>,
        /// Write the first profile as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 40.0)]
        half_width: f64,
        #[arg(long, default_value_t = 0.01)]
        dx: f64,
    },
    /// Multifrequency constructions.
    Multifreq {
        #[command(subcommand)]
        kind: MultiKind,
        /// Write the config stub here instead of printing it.
        #[arg(long, global = true)]
        config_out: Option<PathBuf>,
    },
    /// Gap condition for oscillators with unit leading coefficients.
    Gapcheck {
        #[arg(long)]
        mass: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        positions: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<usize>,
    },
    /// Spectrum of a trace CSV.
    Spectrum {
        trace: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Which trace column pair to analyse.
        #[arg(long, default_value_t = 0)]
        column: usize,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        /// Write frequency,amplitude rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Free evolution of a Gaussian; local energy decay at a radius.
    FreeDecay {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 150.0)]
        half_width: f64,
        #[arg(long, default_value_t = 0.01)]
        dx: f64,
        #[arg(long, default_value_t = 0.5)]
        cfl: f64,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
    },
}

#[derive(Subcommand)]
enum MultiKind {
    /// Linear degeneration at one end (needs 3ω < m).
    Lindeg {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        l: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Two identical oscillators far apart (needs L > π/(2^{3/2} m)).
    Widegap {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        l: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { config, force } => Ok(commands::cmd_simulate(&config, force, out)?.exit_code),
        Command::Batch { configs, force } => commands::cmd_batch(&configs, force, out),
        Command::Solitary { mass, omega, coeffs, profile, half_width, dx } => {
            commands::cmd_solitary(mass, omega, &coeffs, profile.as_deref().map(|p| (p, half_width, dx)), out)?;
            Ok(exit::COMPLETED)
        }
        Command::Multifreq { kind, config_out } => {
            let args = match kind {
                MultiKind::Lindeg { mass, omega, l, beta, alpha, amplitude } => {
                    MultiFreqArgs::Lindeg { mass, omega, l, beta, alpha, amplitude }
                }
                MultiKind::Widegap { mass, l, alpha, beta } => MultiFreqArgs::Widegap { mass, l, alpha, beta },
            };
            commands::cmd_multifreq(args, config_out.as_deref(), out)?;
            Ok(exit::COMPLETED)
        }
        Command::Gapcheck { mass, positions, degrees } => {
            commands::cmd_gapcheck(mass, &positions, &degrees, out)?;
            Ok(exit::COMPLETED)
        }
        Command::Spectrum { trace, mass, column, from, to, csv } => {
            let window = match (from, to) {
                (None, None) => None,
                (Some(a), Some(b)) => Some((a, b)),
                _ => return Err(CliError::Config("give both --from and --to".into())),
            };
            commands::cmd_spectrum(&trace, column, window, mass, csv.as_deref(), out)?;
            Ok(exit::COMPLETED)
        }
        Command::FreeDecay { mass, half_width, dx, cfl, t_end, radius, width } => {
            let status = commands::cmd_free_decay(
                FreeDecayArgs { mass, half_width, dx, cfl, t_end, radius, width },
                out,
            )?
            .status;
            Ok(match status {
                kgsim::integrator::RunStatus::Completed => exit::COMPLETED,
                kgsim::integrator::RunStatus::BlownUp => exit::BLOWN_UP,
                kgsim::integrator::RunStatus::BoundaryContaminated => exit::CONTAMINATED,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kgsim: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
