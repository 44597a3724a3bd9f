//! Command-line surface. Every subcommand's options double as the keys of
//! its TOML config file, spelled exactly like the long flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "ambisep", version, about = "Direction-based source separation for Ambisonics scenes")]
pub struct Cli {
    /// Worker threads (default: logical cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the ACN channel table and optionally the SH vector of a direction.
    Shinfo(ShinfoArgs),
    /// Write a synthetic stem corpus.
    SynthCorpus(SynthCorpusArgs),
    /// Draw a scene manifest from a stem corpus.
    GenScenes(GenScenesArgs),
    /// Render the scenes of a manifest to WAV files.
    Render(RenderArgs),
    /// Simulate a shoebox room and write one Ambisonics impulse response per source.
    SimulateRoom(SimulateRoomArgs),
    /// Steer a signal-independent beamformer at a direction.
    Beamform(BeamformArgs),
    /// Beam pattern over an equiangular grid as CSV.
    Pattern(PatternArgs),
    /// Train a separator network on rendered scenes.
    Train(TrainArgs),
    /// Extract the signal from a direction with a trained network.
    Separate(SeparateArgs),
    /// Score methods on a scene manifest.
    Eval(EvalArgs),
    /// RMS and SI-SDR maps of a method over an equiangular grid.
    Map(MapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamType {
    MaxDi,
    MaxRe,
}

impl From<BeamType> for ambisep_core::evaluation::BeamKind {
    fn from(b: BeamType) -> Self {
        match b {
            BeamType::MaxDi => Self::MaxDi,
            BeamType::MaxRe => Self::MaxRe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    MusicTrain,
    MusicValid,
    MusicTest,
    EventsTrain,
    EventsValid,
    EventsTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcousticsArg {
    Anechoic,
    Room,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Refinement,
    Implicit,
    Mixed,
}

impl From<ModeArg> for ambisep_separator::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Refinement => Self::Refinement,
            ModeArg::Implicit => Self::Implicit,
            ModeArg::Mixed => Self::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelPreset {
    /// Three levels, 8 initial channels.
    Toy,
    /// Six levels, 64 initial channels.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    Orthonormal,
    AmbixSn3d,
}

impl From<ConventionArg> for ambisep_core::Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Orthonormal => Self::Orthonormal,
            ConventionArg::AmbixSn3d => Self::AmbixSn3d,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ShinfoArgs {
    /// Ambisonics order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Direction `azimuth,zenith` in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// TOML file with defaults for these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SynthCorpusArgs {
    /// Corpus root directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Groups per split: `train,valid,test`.
    #[arg(long, value_delimiter = ',')]
    pub groups: Option<Vec<usize>>,
    /// Stem length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GenScenesArgs {
    /// Stem corpus root (with `index.json`).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Manifest output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Number of scenes.
    #[arg(long)]
    pub count: Option<usize>,
    /// Sources per music scene.
    #[arg(long)]
    pub sources: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Segment length in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub silent_fraction: Option<f64>,
    #[arg(long)]
    pub min_separation: Option<f64>,
    #[arg(long, value_enum)]
    pub acoustics: Option<AcousticsArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RenderArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory; one `scene-<id>/` folder per scene.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateRoomArgs {
    /// Room description (JSON); a random room is drawn when absent.
    #[arg(long)]
    pub room: Option<PathBuf>,
    /// Sources of the random room.
    #[arg(long)]
    pub sources: Option<usize>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Response length in seconds (default: mixing time + longest RT60 + 0.1 s).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BeamformArgs {
    #[arg(long = "type", value_enum, value_name = "TYPE")]
    #[serde(rename = "type")]
    pub kind: Option<BeamType>,
    /// Beam order (default: the input order).
    #[arg(long)]
    pub order: Option<usize>,
    /// `azimuth,zenith` in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    /// Channel convention assumed when the input has no sidecar.
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Ambisonics WAV.
    pub input: Option<PathBuf>,
    /// Mono WAV.
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PatternArgs {
    #[arg(long = "type", value_enum, value_name = "TYPE")]
    #[serde(rename = "type")]
    pub kind: Option<BeamType>,
    #[arg(long)]
    pub order: Option<usize>,
    /// `azimuth,zenith` in degrees (default: 0,90).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    #[arg(long)]
    pub n_az: Option<usize>,
    #[arg(long)]
    pub n_zen: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Training scene manifest.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Validation scene manifest (default: the training scenes).
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Checkpoint output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Network order (default: the manifest order).
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_enum)]
    pub model: Option<ModelPreset>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub channels: Option<usize>,
    #[arg(long)]
    pub lstm_layers: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub steps_per_epoch: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub lr_factor: Option<f64>,
    /// Target perturbation radius in degrees.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SeparateArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// `azimuth,zenith` in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Beamformers among `max-di`, `max-re`, `max-sdr`.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Beamformer orders (default: 1 to the manifest order).
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Trained networks to score alongside the beamformers.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<PathBuf>>,
    /// Table CSV output; the full report goes to `<output>.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional CSV of median SI-SDR per active-source count.
    #[arg(long)]
    pub per_count: Option<PathBuf>,
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Bootstrap seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MapArgs {
    /// Ambisonics WAV to map; alternatively `--manifest` with `--scene`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Scene index within the manifest.
    #[arg(long)]
    pub scene: Option<usize>,
    #[arg(long = "type", value_enum, value_name = "TYPE")]
    #[serde(rename = "type")]
    pub kind: Option<BeamType>,
    /// Map a trained network instead of a beamformer.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub n_az: Option<usize>,
    #[arg(long)]
    pub n_zen: Option<usize>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}
