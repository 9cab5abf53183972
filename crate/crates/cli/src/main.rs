use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "twopair", version, about = "Four-photon interference with two entangled-pair sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RNG seed; overrides the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Angle or offset grid, `start:stop:count` (inclusive).
    #[arg(long)]
    pub grid: Option<String>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formula {
    /// Closed form with the config's absent polarizers.
    General,
    /// All four polarizers present, ideal setup.
    #[value(alias = "eq3")]
    AllPresent,
    /// No polarizers in front of D1 and D2.
    #[value(alias = "eq4")]
    NoLeft,
    /// No polarizers in front of D3 and D4.
    #[value(alias = "eq5")]
    NoRight,
    /// Both right photons at D3 behind one polarizer.
    SameBeam,
    /// 1-1 plus 2-photon channels without right polarizers.
    ChannelSum,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form probabilities against the Fock-space oracle.
    Analytic {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "general")]
        formula: Formula,
        /// A single point instead of the grid: four angles in degrees or `absent`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<String>>,
    },
    /// Wave-packet densities and visibilities over a (tau_s/T, tau34/T, dtheta) grid.
    Wavepacket {
        #[command(flatten)]
        common: Common,
        /// `tau_s/T` grid (defaults to --grid, then 0:2:10).
        #[arg(long)]
        taus: Option<String>,
        /// `tau34/T` grid (defaults to --grid, then 0:2:10).
        #[arg(long)]
        tau34: Option<String>,
        /// Left angle difference grid in degrees.
        #[arg(long, default_value = "0:90:10")]
        theta_diff: String,
        /// Gauss-Hermite base order.
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
    /// Event-level coincidence simulation.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_events: Option<u64>,
        /// Histogram CSV path.
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// CHSH statistic on the left pair.
    Chsh {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_events: Option<u64>,
        /// a, a', b, b' in degrees.
        #[arg(long, value_delimiter = ',', default_value = "0,45,22.5,67.5", allow_hyphen_values = true)]
        settings: Vec<f64>,
        /// Evaluate the closed-form sin^2 correlation instead of simulating.
        #[arg(long, conflicts_with = "lhv")]
        analytic: bool,
        /// Local hidden-variable baseline.
        #[arg(long)]
        lhv: bool,
    },
    /// Runs the oracle suite and reports pass/fail.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analytic { common, formula, theta } => commands::analytic(&common, formula, theta.as_deref()),
        Command::Wavepacket {
            common,
            taus,
            tau34,
            theta_diff,
            order,
        } => commands::wavepacket(&common, taus.as_deref(), tau34.as_deref(), &theta_diff, order),
        Command::Montecarlo { common, n_events, hist } => commands::montecarlo(&common, n_events, hist.as_deref()),
        Command::Chsh {
            common,
            n_events,
            settings,
            analytic,
            lhv,
        } => commands::chsh(&common, n_events, &settings, analytic, lhv),
        Command::OracleCheck { common } => commands::oracle_check(&common),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
