//! Network training and method evaluation.

use std::collections::BTreeMap;
use std::path::Path;

use ambisep_core::evaluation::{per_source_count_csv, BeamKind, BeamMethod, Condition, EvalReport, MaxSdrOracle, Method};
use ambisep_core::{evaluate_method, LabeledMixture};
use ambisep_scene::{AcousticsPolicy, SceneManifest};
use ambisep_separator::{train, AdamConfig, Checkpoint, Mode, ModelConfig, ModelParams, NetworkMethod, TrainConfig};

use super::audio::ensure_parent;
use super::{load_manifest, render_labeled, write_text};
use crate::args::{EvalArgs, ModelPreset, TrainArgs};
use crate::config::{required, resolved_json, usage, write_provenance, CliError, CliResult};

fn model_config(a: &TrainArgs, order: usize, sample_rate: u32) -> CliResult<ModelConfig> {
    let mode: Mode = required(a.mode, "mode")?.into();
    let mut cfg = match a.model.unwrap_or(ModelPreset::Full) {
        ModelPreset::Toy => ModelConfig::toy(mode, order, sample_rate),
        ModelPreset::Full => ModelConfig::new(mode, order, sample_rate),
    };
    cfg.depth = a.depth.unwrap_or(cfg.depth);
    cfg.channels = a.channels.unwrap_or(cfg.channels);
    cfg.lstm_layers = a.lstm_layers.unwrap_or(cfg.lstm_layers);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn train_config(a: &TrainArgs) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        adam: AdamConfig { lr: a.lr.unwrap_or(d.adam.lr), ..d.adam },
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        steps: a.steps.unwrap_or(d.steps),
        steps_per_epoch: a.steps_per_epoch.unwrap_or(d.steps_per_epoch),
        patience: a.patience.unwrap_or(d.patience),
        lr_factor: a.lr_factor.unwrap_or(d.lr_factor),
        window_deg: a.window.unwrap_or(d.window_deg),
        seed: a.seed.unwrap_or(d.seed),
    }
}

pub fn train_cmd(a: TrainArgs) -> CliResult<()> {
    let corpus = required(a.corpus.clone(), "corpus")?;
    let train_path = required(a.train.clone(), "train")?;
    let output = required(a.output.clone(), "output")?;
    let manifest = load_manifest(&train_path)?;
    let order = a.order.unwrap_or(manifest.policy.order);
    if order > manifest.policy.order {
        return Err(usage(format!("network order {order} exceeds the scene order {}", manifest.policy.order)));
    }
    let truncate = |scenes: Vec<LabeledMixture<f32>>| -> CliResult<Vec<LabeledMixture<f32>>> {
        scenes
            .into_iter()
            .map(|mut s| {
                s.mixture = s.mixture.truncated(order.min(s.mixture.order()))?;
                Ok(s)
            })
            .collect()
    };
    let train_scenes = truncate(render_labeled::<f32>(&corpus, &train_path, None)?)?;
    let valid_scenes = match &a.valid {
        Some(v) => truncate(render_labeled::<f32>(&corpus, v, None)?)?,
        None => train_scenes.clone(),
    };
    if train_scenes.is_empty() {
        return Err(CliError::Data(anyhow::anyhow!("no scenes in {}", train_path.display())));
    }
    let fs = train_scenes[0].mixture.sample_rate();
    let cfg = model_config(&a, order, fs)?;
    let tc = train_config(&a);
    let init = ModelParams::<f32>::init(cfg, tc.seed)?;
    let (best, history) = train(init, &train_scenes, &valid_scenes, &tc)?;
    let mut metrics = BTreeMap::new();
    metrics.insert("best_valid_loss".to_string(), history.best_valid_loss);
    metrics.insert("steps".to_string(), tc.steps as f64);
    if let Some(e) = history.best_epoch {
        metrics.insert("best_epoch".to_string(), e as f64);
    }
    ensure_parent(&output)?;
    Checkpoint::new(&best, tc.seed, metrics).save(&output)?;
    let mut hist_path = output.clone().into_os_string();
    hist_path.push(".history.json");
    let hist_path = std::path::PathBuf::from(hist_path);
    write_text(&hist_path, &(serde_json::to_string_pretty(&history).expect("json") + "\n"))?;
    println!("trained {} parameters for {} steps; best validation L1 {:.6}", best.values.len(), tc.steps, history.best_valid_loss);
    write_provenance(&output, "train", tc.seed, resolved_json(&a), &[output.clone(), hist_path])
}

fn beam_method(name: &str, order: usize, ridge: f64) -> CliResult<Box<dyn Method<f64>>> {
    Ok(match name {
        "max-di" => Box::new(BeamMethod { kind: BeamKind::MaxDi, order }),
        "max-re" => Box::new(BeamMethod { kind: BeamKind::MaxRe, order }),
        "max-sdr" => Box::new(MaxSdrOracle { order, ridge }),
        other => return Err(usage(format!("unknown method '{other}' (max-di, max-re, max-sdr)"))),
    })
}

fn condition(m: &SceneManifest) -> Condition {
    match m.policy.acoustics {
        AcousticsPolicy::Anechoic => Condition::Anechoic,
        AcousticsPolicy::Room => Condition::Room,
    }
}

pub fn eval(a: EvalArgs) -> CliResult<()> {
    let corpus = required(a.corpus.clone(), "corpus")?;
    let manifest_path = required(a.manifest.clone(), "manifest")?;
    let output = required(a.output.clone(), "output")?;
    let manifest = load_manifest(&manifest_path)?;
    if manifest.scenes.is_empty() {
        return Err(CliError::Data(anyhow::anyhow!("no scenes in {}", manifest_path.display())));
    }
    let scenes = render_labeled::<f64>(&corpus, &manifest_path, None)?;
    let top = manifest.policy.order;
    let orders = a.orders.clone().unwrap_or_else(|| (1..=top.max(1)).collect());
    if let Some(&o) = orders.iter().find(|&&o| o > top) {
        return Err(usage(format!("order {o} exceeds the scene order {top}")));
    }
    let seed = a.seed.unwrap_or(0);
    let ridge = a.ridge.unwrap_or(0.0);
    let names = a.methods.clone().unwrap_or_else(|| vec!["max-di".into(), "max-re".into(), "max-sdr".into()]);
    let mut rows = Vec::new();
    for name in &names {
        for &order in &orders {
            let m = beam_method(name, order, ridge)?;
            rows.push(evaluate_method(m.as_ref(), order, &scenes, seed)?);
        }
    }
    for path in a.checkpoints.iter().flatten() {
        let ck = Checkpoint::load(path).map_err(|e| CliError::Data(anyhow::anyhow!("{}: {e}", path.display())))?;
        let order = ck.params.config.order;
        if order > top {
            return Err(usage(format!("{} needs order {order}, scenes have {top}", path.display())));
        }
        let name = format!("{}:{}", ck.params.config.mode.as_str(), file_stem(path));
        let net = NetworkMethod { name, params: ck.params.cast::<f64>() };
        rows.push(evaluate_method(&net, order, &scenes, seed)?);
    }
    let report = EvalReport { condition: condition(&manifest), seed, scene_count: scenes.len(), rows };
    write_text(&output, &report.to_csv())?;
    let mut json_path = output.clone().into_os_string();
    json_path.push(".json");
    let json_path = std::path::PathBuf::from(json_path);
    write_text(&json_path, &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    let mut outputs = vec![output.clone(), json_path];
    if let Some(p) = &a.per_count {
        write_text(p, &per_source_count_csv(&report.rows, &[1, 2, 3, 4]))?;
        outputs.push(p.clone());
    }
    print!("{}", report.to_csv());
    write_provenance(&output, "eval", seed, resolved_json(&a), &outputs)
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
