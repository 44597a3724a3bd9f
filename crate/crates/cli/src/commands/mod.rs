mod audio;
mod data;
mod learn;

use std::fs;
use std::path::Path;

use ambisep_core::{Direction, LabeledMixture, Real};
use ambisep_scene::{render_scene, SceneManifest, StemCorpus};
use rayon::prelude::*;

use crate::args::Command;
use crate::config::{merge_config, usage, CliError, CliResult};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Shinfo(a) => audio::shinfo(merge_config(a.clone(), a.config.as_deref())?),
        Command::SynthCorpus(a) => data::synth(merge_config(a.clone(), a.config.as_deref())?),
        Command::GenScenes(a) => data::gen_scenes(merge_config(a.clone(), a.config.as_deref())?),
        Command::Render(a) => data::render(merge_config(a.clone(), a.config.as_deref())?),
        Command::SimulateRoom(a) => data::simulate_room(merge_config(a.clone(), a.config.as_deref())?),
        Command::Beamform(a) => audio::beamform(merge_config(a.clone(), a.config.as_deref())?),
        Command::Pattern(a) => audio::pattern(merge_config(a.clone(), a.config.as_deref())?),
        Command::Train(a) => learn::train_cmd(merge_config(a.clone(), a.config.as_deref())?),
        Command::Separate(a) => audio::separate_cmd(merge_config(a.clone(), a.config.as_deref())?),
        Command::Eval(a) => learn::eval(merge_config(a.clone(), a.config.as_deref())?),
        Command::Map(a) => audio::map(merge_config(a.clone(), a.config.as_deref())?),
    }
}

/// `[azimuth, zenith]` in degrees.
fn parse_target(v: &[f64]) -> CliResult<Direction> {
    match v {
        [az, zen] => Direction::from_degrees(*az, *zen).map_err(|e| usage(e.to_string())),
        _ => Err(usage(format!("a direction needs azimuth,zenith in degrees, got {} values", v.len()))),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    audio::ensure_parent(path)?;
    fs::write(path, text)?;
    Ok(())
}

fn load_corpus(root: &Path) -> CliResult<StemCorpus> {
    data::open_corpus(root).map_err(|e| match e {
        CliError::Data(e) => CliError::Data(e.context(format!("corpus {}", root.display()))),
        other => other,
    })
}

fn load_manifest(path: &Path) -> CliResult<SceneManifest> {
    SceneManifest::load(path).map_err(|e| CliError::Data(anyhow::anyhow!("manifest {}: {e}", path.display())))
}

/// Renders every scene of a manifest, or only scene `index`.
fn render_labeled<T: Real>(corpus: &Path, manifest: &Path, index: Option<usize>) -> CliResult<Vec<LabeledMixture<T>>> {
    let corpus = load_corpus(corpus)?;
    let m = load_manifest(manifest)?;
    let specs = match index {
        Some(i) => vec![m.scenes.get(i).cloned().ok_or_else(|| usage(format!("scene {i} not in a manifest of {}", m.scenes.len())))?],
        None => m.scenes,
    };
    Ok(specs.par_iter().map(|s| render_scene::<T>(s, &corpus).and_then(|r| r.into_labeled())).collect::<ambisep_core::Result<Vec<_>>>()?)
}
