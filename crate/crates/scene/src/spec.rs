//! Scene descriptions, generation policies and manifests.

use std::fs;
use std::path::Path;

use ambisep_core::{Direction, Error, Result};
use ambisep_room::RoomSpec;
use serde::{Deserialize, Serialize};

use crate::corpus::Split;

pub const DEFAULT_DURATION: f64 = 6.0;
pub const DEFAULT_MIN_SEPARATION_DEG: f64 = 5.0;
pub const DEFAULT_SILENT_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSlot {
    pub stem: String,
    /// Segment start within the stem, in samples.
    pub start: usize,
    pub direction: Direction,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Acoustics {
    Anechoic,
    Room { room: RoomSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub scene_id: u64,
    pub split: Split,
    pub sources: Vec<SourceSlot>,
    /// Segment length in samples.
    pub samples: usize,
    pub sample_rate: u32,
    pub acoustics: Acoustics,
    pub order: usize,
    /// Seed of the scene's random stream; also seeds room tail noise.
    pub seed: u64,
}

impl SceneSpec {
    pub fn duration(&self) -> f64 {
        self.samples as f64 / self.sample_rate as f64
    }

    pub fn active_count(&self) -> usize {
        self.sources.iter().filter(|s| s.active).count()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.sources.iter().map(|s| s.direction).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SourceCount {
    Fixed { k: usize },
    Uniform { min: usize, max: usize },
}

impl SourceCount {
    pub fn max(self) -> usize {
        match self {
            SourceCount::Fixed { k } => k,
            SourceCount::Uniform { max, .. } => max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcousticsPolicy {
    Anechoic,
    Room,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenePolicy {
    pub split: Split,
    pub sources: SourceCount,
    /// Probability that exactly one source is silenced (scenes with ≥ 2 sources).
    pub silent_fraction: f64,
    /// Draw all stems from one group at a common offset.
    pub same_group: bool,
    /// Scenes with fewer active sources are redrawn.
    pub min_active: usize,
    pub duration: f64,
    pub order: usize,
    pub acoustics: AcousticsPolicy,
    pub min_separation_deg: f64,
}

impl ScenePolicy {
    /// Music-style training: `k` stems from random songs, 30 % one silenced.
    pub fn music_train(k: usize, order: usize) -> Self {
        Self {
            split: Split::Train,
            sources: SourceCount::Fixed { k },
            silent_fraction: DEFAULT_SILENT_FRACTION,
            same_group: false,
            min_active: 1,
            duration: DEFAULT_DURATION,
            order,
            acoustics: AcousticsPolicy::Anechoic,
            min_separation_deg: DEFAULT_MIN_SEPARATION_DEG,
        }
    }

    /// Music-style test: `k` stems of one song at the same offset, none silenced.
    pub fn music_test(k: usize, order: usize) -> Self {
        Self { split: Split::Test, same_group: true, silent_fraction: 0.0, ..Self::music_train(k, order) }
    }

    /// Sound-event training: 1 to 4 sources.
    pub fn events_train(order: usize) -> Self {
        Self { sources: SourceCount::Uniform { min: 1, max: 4 }, ..Self::music_train(1, order) }
    }

    /// Sound-event test: 1 to 4 sources, kept only with two or more active.
    pub fn events_test(order: usize) -> Self {
        Self { split: Split::Test, silent_fraction: 0.0, min_active: 2, ..Self::events_train(order) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.silent_fraction) {
            return Err(Error::Domain(format!("silent fraction {} outside [0, 1]", self.silent_fraction)));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Domain("duration must be positive".into()));
        }
        let (lo, hi) = match self.sources {
            SourceCount::Fixed { k } => (k, k),
            SourceCount::Uniform { min, max } => (min, max),
        };
        if lo == 0 || lo > hi {
            return Err(Error::Domain(format!("invalid source count range {lo}..={hi}")));
        }
        if self.min_active > hi {
            return Err(Error::Domain(format!("min_active {} exceeds the source count {hi}", self.min_active)));
        }
        if self.order > ambisep_core::MAX_ORDER {
            return Err(Error::UnsupportedOrder { order: self.order, max: ambisep_core::MAX_ORDER });
        }
        Ok(())
    }
}

/// One dataset: the policy, the master seed and every scene drawn from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneManifest {
    pub version: String,
    pub master_seed: u64,
    pub policy: ScenePolicy,
    pub scenes: Vec<SceneSpec>,
}

impl SceneManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
