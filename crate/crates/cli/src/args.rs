use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "medusa",
    version,
    about = "Jellyfish motion analysis and reservoir prediction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Input and output locations shared by every command.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Io {
    /// Input file or directory.
    #[arg(long, env = "MEDUSA_DATA_DIR")]
    pub input: Option<PathBuf>,
    /// Output directory; receives one manifest.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate synthetic trials with known ground truth.
    Synth(SynthArgs),
    /// Assemble 3D trials from per-view tracker exports.
    Ingest(IngestArgs),
    /// Lengths, radii, orientation and body-frame velocity tables.
    Kinematics(KinematicsArgs),
    /// Power spectra and pulse statistics with power-law fits.
    Soc(SocArgs),
    /// Stimulus-locked phase response.
    Phase(PhaseArgs),
    /// Echo State Property index per condition with group statistics.
    Esp(EspArgs),
    /// Train a reservoir readout.
    Train(TrainArgs),
    /// Run a trained model over trials.
    Predict(PredictArgs),
    /// Train one model per condition and score each on every condition.
    Confusion(ConfusionArgs),
    /// Exhaustive best-subset sensor search.
    SearchSensors(SearchArgs),
    /// Export a trained model as a compact f32 blob.
    ExportModel(ExportArgs),
    /// R² over mux length and horizon.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[command(flatten)]
    pub io: Io,
    /// Stimulus period in seconds; omit for spontaneous swimming.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
    pub seconds: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Draw per-animal body parameters from this seed instead of the defaults.
    #[arg(long)]
    pub animal: Option<u64>,
    /// Also write per-view tracker exports for `ingest`.
    #[arg(long)]
    pub views: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, default_value_t = medusa_core::ingest::CONFIDENCE_THRESHOLD)]
    pub confidence: f64,
    #[arg(long, default_value_t = medusa_core::ingest::DEFAULT_MAX_GAP_FRAMES)]
    pub max_gap: usize,
    #[arg(long, default_value_t = medusa_core::ingest::TANK_SIZE_MM)]
    pub tank_mm: f64,
    #[arg(long, default_value_t = 0.5)]
    pub led_threshold: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct KinematicsArgs {
    #[command(flatten)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct SocArgs {
    #[command(flatten)]
    pub io: Io,
    /// Welch segment length in samples (shortened for short series).
    #[arg(long, default_value_t = 4096)]
    pub segment: usize,
    /// Pulse threshold on the standardized contraction signal
    /// (default: mean + 0.5 SD).
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub io: Io,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub enum EspChannels {
    Lengths,
    Vx,
    Vy,
    Vz,
}

#[derive(Args, Debug, Serialize)]
pub struct EspArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, value_enum, default_value = "lengths")]
    pub channels: EspChannels,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub transient: f64,
    #[arg(long, default_value_t = 30.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = medusa_core::response::DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub enum ArchArg {
    Esn,
    Prc,
    Hybrid,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub enum LeakArg {
    Input,
    State,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, serde::Deserialize, PartialEq, Eq)]
pub enum TargetSet {
    /// v_x, v_y, v_z.
    Velocity,
    /// v_z only.
    Vz,
    /// Velocities plus dead-reckoned position and orientation.
    DeadReckoned,
}

/// Reservoir settings shared by the training commands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RcOpts {
    #[arg(long, default_value_t = 100)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.35, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub input_scale: f64,
    /// Mux stride in samples.
    #[arg(long, default_value_t = 6)]
    pub stride: usize,
    /// Samples excluded from training and scoring
    /// (default: 1000 for one trial, 10000 for several).
    #[arg(long)]
    pub washout: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "hybrid")]
    pub arch: ArchArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub leak: f64,
    #[arg(long, value_enum, default_value = "input")]
    pub leak_mode: LeakArg,
    #[arg(long, default_value_t = medusa_core::reservoir::DEFAULT_RIDGE)]
    pub ridge: f64,
    /// Sensor channels (pool names such as `inner_radius` or `Y2-O1`).
    #[arg(long, value_delimiter = ',', default_value = "outer_radius,inner_radius,Y2-O1,R2-O2")]
    pub sensors: Vec<String>,
    #[arg(long, value_enum, default_value = "velocity")]
    pub targets: TargetSet,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub rc: RcOpts,
    /// Mux length in seconds.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub mux: f64,
    /// Prediction horizons in seconds.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.5,1,1.5,2",
        allow_negative_numbers = true
    )]
    pub horizons: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    pub io: Io,
    /// Model written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Samples skipped before scoring (default: the training washout).
    #[arg(long)]
    pub washout: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct ConfusionArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub rc: RcOpts,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub mux: f64,
    /// Horizon in seconds at which models are compared.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub horizon: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, default_value_t = medusa_core::sensorsearch::DEFAULT_K_MAX)]
    pub kmax: usize,
    /// Samples excluded from the fits (default 1000).
    #[arg(long)]
    pub washout: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExportArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Model written by `train`.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub rc: RcOpts,
    /// Mux lengths in seconds.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    pub mux: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.5,1,1.5,2",
        allow_negative_numbers = true
    )]
    pub horizons: Vec<f64>,
}
