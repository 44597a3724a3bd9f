//! Corpus, scene and room generation.

use std::fs;
use std::path::Path;

use ambisep_core::wav::{write_ambisonics, write_mono};
use ambisep_room::{render_drir, sample_room, RenderOptions, RoomSpec};
use ambisep_scene::synth::{synth_corpus, SynthOptions};
use ambisep_scene::{build_scenes, render_scene, AcousticsPolicy, ScenePolicy, SourceCount, Split, StemCorpus};
use rayon::prelude::*;

use super::audio::ensure_parent;
use super::{load_corpus, load_manifest, write_text};
use crate::args::{AcousticsArg, GenScenesArgs, Preset, RenderArgs, SimulateRoomArgs, SynthCorpusArgs};
use crate::config::{required, resolved_json, usage, write_provenance, CliError, CliResult};

pub fn synth(a: SynthCorpusArgs) -> CliResult<()> {
    let root = required(a.output.clone(), "output")?;
    let mut opts = SynthOptions::default();
    if let Some(g) = &a.groups {
        opts.groups = g.as_slice().try_into().map_err(|_| usage("--groups takes three counts: train,valid,test"))?;
    }
    opts.duration = a.duration.unwrap_or(opts.duration);
    opts.sample_rate = a.sample_rate.unwrap_or(opts.sample_rate);
    opts.seed = a.seed.unwrap_or(opts.seed);
    if !(opts.duration > 0.0) || opts.sample_rate == 0 {
        return Err(usage("duration and sample rate must be positive"));
    }
    let corpus = synth_corpus(&root, &opts)?;
    println!("{} stems written to {}", corpus.entries().len(), root.display());
    let index = root.join("index.json");
    write_provenance(&index, "synth-corpus", opts.seed, resolved_json(&a), &[root])
}

fn policy(a: &GenScenesArgs) -> CliResult<ScenePolicy> {
    let order = a.order.unwrap_or(1);
    let k = a.sources.unwrap_or(3);
    let mut p = match a.preset.unwrap_or(Preset::MusicTrain) {
        Preset::MusicTrain => ScenePolicy::music_train(k, order),
        Preset::MusicValid => ScenePolicy { split: Split::Valid, ..ScenePolicy::music_train(k, order) },
        Preset::MusicTest => ScenePolicy::music_test(k, order),
        Preset::EventsTrain => ScenePolicy::events_train(order),
        Preset::EventsValid => ScenePolicy { split: Split::Valid, ..ScenePolicy::events_train(order) },
        Preset::EventsTest => ScenePolicy::events_test(order),
    };
    if a.sources.is_some() && matches!(p.sources, SourceCount::Uniform { .. }) {
        p.sources = SourceCount::Fixed { k };
        p.min_active = p.min_active.min(k);
    }
    if let Some(d) = a.duration {
        p.duration = d;
    }
    if let Some(f) = a.silent_fraction {
        p.silent_fraction = f;
    }
    if let Some(s) = a.min_separation {
        p.min_separation_deg = s;
    }
    if let Some(ac) = a.acoustics {
        p.acoustics = match ac {
            AcousticsArg::Anechoic => AcousticsPolicy::Anechoic,
            AcousticsArg::Room => AcousticsPolicy::Room,
        };
    }
    p.validate().map_err(|e| usage(e.to_string()))?;
    Ok(p)
}

pub fn gen_scenes(a: GenScenesArgs) -> CliResult<()> {
    let corpus = load_corpus(&required(a.corpus.clone(), "corpus")?)?;
    let output = required(a.output.clone(), "output")?;
    let count = required(a.count, "count")?;
    let seed = a.seed.unwrap_or(0);
    let manifest = build_scenes(&corpus, &policy(&a)?, seed, count)?;
    ensure_parent(&output)?;
    manifest.save(&output)?;
    write_provenance(&output, "gen-scenes", seed, resolved_json(&a), std::slice::from_ref(&output))
}

pub fn render(a: RenderArgs) -> CliResult<()> {
    let corpus = load_corpus(&required(a.corpus.clone(), "corpus")?)?;
    let manifest_path = required(a.manifest.clone(), "manifest")?;
    let manifest = load_manifest(&manifest_path)?;
    let out = required(a.output.clone(), "output")?;
    fs::create_dir_all(&out)?;
    manifest.scenes.par_iter().try_for_each(|spec| -> CliResult<()> {
        let r = render_scene::<f32>(spec, &corpus)?;
        let dir = out.join(format!("scene-{:06}", spec.scene_id));
        fs::create_dir_all(&dir)?;
        write_ambisonics(&dir.join("mixture.wav"), &r.mixture)?;
        for (k, t) in r.truths.iter().enumerate() {
            write_mono(&dir.join(format!("source-{k}.wav")), t)?;
        }
        write_text(&dir.join("scene.json"), &(serde_json::to_string_pretty(&r.spec).expect("json") + "\n"))?;
        Ok(())
    })?;
    println!("{} scenes rendered to {}", manifest.scenes.len(), out.display());
    write_provenance(&out.join("scenes"), "render", manifest.master_seed, resolved_json(&a), std::slice::from_ref(&out))
}

pub fn simulate_room(a: SimulateRoomArgs) -> CliResult<()> {
    let seed = a.seed.unwrap_or(0);
    let room = match &a.room {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            RoomSpec::from_json(&text).map_err(|e| CliError::Data(anyhow::anyhow!("{}: {e}", path.display())))?
        }
        None => sample_room(seed, a.sources.unwrap_or(1), a.sample_rate.unwrap_or(16000)),
    };
    room.validate()?;
    let order = a.order.unwrap_or(1);
    let duration = a.duration.unwrap_or_else(|| room.mixing_time() + room.rt60.iter().copied().fold(0.0, f64::max) + 0.1);
    let out = required(a.output.clone(), "output")?;
    fs::create_dir_all(&out)?;
    write_text(&out.join("room.json"), &room.to_json())?;
    let mut outputs = vec![out.join("room.json")];
    for i in 0..room.sources.len() {
        let opts = RenderOptions { seed: seed.wrapping_add(i as u64), ..RenderOptions::default() };
        let h = render_drir::<f32>(&room, i, order, duration, opts)?;
        let path = out.join(format!("drir-{i}.wav"));
        write_ambisonics(&path, &h)?;
        outputs.push(path);
    }
    println!("room {:?} m, {} sources, t_mix {:.4} s", room.dims, room.sources.len(), room.mixing_time());
    write_provenance(&out.join("room"), "simulate-room", seed, resolved_json(&a), &outputs)
}

/// Corpus loader that also accepts a bare directory tree without index.
pub(super) fn open_corpus(root: &Path) -> CliResult<StemCorpus> {
    if root.join("index.json").exists() {
        Ok(StemCorpus::load(root)?)
    } else {
        Ok(StemCorpus::scan(root)?)
    }
}
