//! `kipa` — simulate and calibrate a kinetic-inductance parametric amplifier
//! from the command line.
//!
//! Every subcommand is deterministic: identical invocation, inputs and seed
//! produce byte-identical result files. Exit codes: 0 success, 2 validation
//! error, 3 solver/fit failure, 4 I/O failure.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod params;

#[derive(Parser, Debug)]
#[command(
    name = "kipa",
    version,
    about = "Kerr parametric-amplifier simulation and calibration toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive the resonator quantities (α, Z, ω₀, I*, K) from a device file
    /// and cross-check them against its stated parameters.
    Derive(commands::DeriveArgs),
    /// Solve a two-tone operating point and write its gain spectrum.
    SimulateGain(commands::SimulateGainArgs),
    /// Sweep the signal phase at the degenerate point (phase-sensitive gain).
    SimulatePs(commands::SimulatePsArgs),
    /// Fit ω₀, κ_ext, κ_int to a complex reflection trace.
    FitS11(commands::FitS11Args),
    /// Fit system gain and added noise to a variable-temperature sweep, and
    /// optionally back out the device's own added noise.
    FitNoise(commands::FitNoiseArgs),
    /// Re-tune the drive after a field-induced resonance shift.
    Compensate(commands::CompensateArgs),
    /// Invert the design: bridge geometry for a target Kerr coefficient.
    Design(commands::DesignArgs),
    /// Generate synthetic measurement data with seeded noise.
    Synth {
        #[command(subcommand)]
        model: commands::SynthModel,
    },
}

fn run(cli: &Cli) -> kipa_core::Result<()> {
    match &cli.command {
        Command::Derive(args) => commands::derive(args),
        Command::SimulateGain(args) => commands::simulate_gain(args),
        Command::SimulatePs(args) => commands::simulate_ps(args),
        Command::FitS11(args) => commands::fit_s11(args),
        Command::FitNoise(args) => commands::fit_noise(args),
        Command::Compensate(args) => commands::compensate(args),
        Command::Design(args) => commands::design(args),
        Command::Synth { model } => match model {
            commands::SynthModel::Reflection(args) => commands::synth_reflection(args),
            commands::SynthModel::Noise(args) => commands::synth_noise(args),
            commands::SynthModel::Field(args) => commands::synth_field(args),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code())
        }
    }
}
