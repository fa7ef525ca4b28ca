//! `billiard-lab`: inspect shapes, solve periodic orbits, run the criteria and
//! the example suite, and write plot data.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use billiard_core::billiards::SystemKind;

#[derive(Parser, Debug)]
#[command(
    name = "billiard-lab",
    version,
    about = "Convex billiards: orbits, invariant curves and their criteria"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Period, convexity margin, symmetry orders and widths of a shape.
    Curve {
        #[arg(long)]
        curve: String,
    },
    /// Solve for a (k, r) periodic orbit.
    Orbit(OrbitArgs),
    /// Run one of the integrability criteria and print its verdict.
    Criteria(CriteriaArgs),
    /// Run the example suite and print PASS/FAIL per acceptance check.
    Examples {
        /// Also run the perimeters on polygons rounded by this radius.
        #[arg(long)]
        rounded: Option<f64>,
        /// Exponent of the L^p ball used for the non-integrability check.
        #[arg(long, default_value_t = 4.0)]
        lp: f64,
    },
    /// Write CSV data for plots.
    PlotData(PlotArgs),
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    #[arg(long, value_parser = parse_system)]
    system: SystemKind,
    /// Table shape: path to a JSON spec, or the JSON itself.
    #[arg(long)]
    curve: String,
    /// Gauge body for the Minkowski system; defaults to the table.
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    r: i64,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Initial parameters: `t0` for a uniform start, or all `k` values comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Vec<f64>,
    /// Output file; `.csv` gives a table, anything else JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum CriterionKind {
    Gutkin,
    OuterFourier,
    SymplecticFourier,
    Minkowski,
}

#[derive(Args, Debug)]
struct CriteriaArgs {
    #[arg(value_enum)]
    kind: CriterionKind,
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Threshold for the verdict.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PlotKind {
    Curve,
    Orbit,
    AngleProfile,
    Constancy,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long, value_enum)]
    what: PlotKind,
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    body: Option<String>,
    #[arg(long, value_parser = parse_system)]
    system: Option<SystemKind>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r: Option<i64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_system(s: &str) -> Result<SystemKind, String> {
    s.parse().map_err(|e: billiard_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curve { curve } => commands::curve(&curve),
        Command::Orbit(a) => commands::orbit(&a),
        Command::Criteria(a) => commands::criteria(&a),
        Command::Examples { rounded, lp } => commands::examples(rounded, lp),
        Command::PlotData(a) => commands::plot_data(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
