use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "amplispace",
    version,
    about = "Marginal amplitudes and Born's rule on extended phase spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the output document here instead of stdout
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Read direction flags as angles in degrees in the x-z plane, measured from z
    #[arg(long, global = true)]
    pub planar: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginal of one spin direction in a constrained single-particle ensemble
    SpinMarginal(SpinMarginalArgs),
    /// Singlet pair probabilities and correlation for two settings
    Singlet(SingletArgs),
    /// CHSH value from the amplitude formalism next to the local bound
    Chsh(ChshArgs),
    /// Exhaustive local deterministic strategies for four CHSH settings
    ClassicalCheck(ChshArgs),
    /// Interference terms of the three-direction singlet marginals
    Triple(TripleArgs),
    /// Two-slit pattern with a fixed, averaged or random phase shift
    TwoSlit(TwoSlitArgs),
    /// Phase-space amplitude of a Gaussian packet and its marginals
    PhaseSpace(PhaseSpaceArgs),
    /// Free evolution of a Gaussian packet
    Evolve(EvolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed form when exactly one constraint is present, enumeration otherwise
    Auto,
    Closed,
    Brute,
}

#[derive(Debug, Args, Serialize)]
pub struct SpinMarginalArgs {
    /// JSON file with an array of [x, y, z] directions
    #[arg(long, conflicts_with = "direction")]
    pub directions: Option<PathBuf>,

    /// One direction (repeat in order); "x,y,z" or degrees with --planar
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Vec<String>,

    /// Constraint INDEX:SIGN, e.g. 0:+ (repeatable)
    #[arg(long)]
    pub constraint: Vec<String>,

    /// Index of the direction to marginalize onto
    #[arg(long)]
    pub target: usize,

    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
}

#[derive(Debug, Args, Serialize)]
pub struct SingletArgs {
    /// Setting of particle I
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// Setting of particle II
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ChshArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub a2: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b2: String,
}

#[derive(Debug, Args, Serialize)]
pub struct TripleArgs {
    /// Direction measured on particle I
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// First direction measured on particle II
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Summed direction on particle II
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    /// Restrict to one sign of particle I
    #[arg(long, allow_hyphen_values = true)]
    pub s1: Option<String>,
    /// Restrict to one sign of particle II along b
    #[arg(long, allow_hyphen_values = true)]
    pub s2: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    /// Known shift --theta
    Fixed,
    /// Trapezoid average over --samples equally spaced phases
    Quadrature,
    /// Equally spaced phases with a seeded random offset (--samples, --seed)
    Random,
}

#[derive(Debug, Args, Serialize)]
pub struct TwoSlitArgs {
    /// Slit separation d [m]
    #[arg(long)]
    pub separation: f64,
    /// Slit width w [m]
    #[arg(long)]
    pub width: f64,
    /// Wavelength [m]
    #[arg(long)]
    pub wavelength: f64,
    /// Slit-to-screen distance D [m]
    #[arg(long)]
    pub screen_distance: f64,
    /// Screen samples (power of two, at least 16)
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
    /// Screen extent [m]; defaults to wavelength * D / w
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long, value_enum, default_value_t = PhaseMode::Quadrature)]
    pub phase: PhaseMode,
    /// Phase shift in radians for --phase fixed
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hidden-axis size for the positivity report
    #[arg(long, default_value_t = 16)]
    pub hidden_size: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PacketArgs {
    /// Grid points (power of two, at least 16)
    #[arg(long, default_value_t = 1024)]
    pub points: usize,
    /// Grid extent L
    #[arg(long, default_value_t = 40.0)]
    pub length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    /// Packet width sigma
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Packet center
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center: f64,
    /// Packet mean momentum
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dump {
    /// Z(x, p) on the full lattice
    PhaseSpace,
    /// Z(x) from summing over p
    MarginalX,
    /// Z(p) from summing over x
    MarginalP,
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseSpaceArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Anchor position x0
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Anchor momentum p0
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p0: f64,
    /// Table written with --format csv
    #[arg(long, value_enum, default_value_t = Dump::MarginalX)]
    pub dump: Dump,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Total evolution time
    #[arg(long, allow_hyphen_values = true)]
    pub time: f64,
    /// Number of equal steps
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
}
