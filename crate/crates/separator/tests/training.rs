use std::collections::BTreeMap;

use ambisep_core::{encode_anechoic, Direction, LabeledMixture, MonoBuffer};
use ambisep_separator::{
    evaluate_loss, forward, separate, separate_many, train, AdamConfig, Checkpoint, Mode, ModelConfig, ModelParams, TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scene(seed: u64, order: usize, len: usize) -> LabeledMixture<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = vec![Direction::new(0.4, 1.2).unwrap(), Direction::new(-2.0, 2.1).unwrap()];
    let truths: Vec<MonoBuffer<f32>> =
        (0..2).map(|_| MonoBuffer::new((0..len).map(|_| rng.random_range(-0.3f32..0.3)).collect(), 8000).unwrap()).collect();
    let srcs: Vec<_> = truths.iter().cloned().zip(dirs.iter().copied()).collect();
    let mix = encode_anechoic(&srcs, order).unwrap();
    LabeledMixture::new(format!("s{seed}"), mix, truths, dirs, vec![true, true]).unwrap()
}

fn small(mode: Mode) -> ModelConfig {
    ModelConfig { depth: 2, channels: 4, lstm_layers: 1, ..ModelConfig::toy(mode, 1, 8000) }
}

fn quick() -> TrainConfig {
    TrainConfig {
        adam: AdamConfig { lr: 3e-3, ..AdamConfig::default() },
        batch_size: 4,
        steps: 12,
        steps_per_epoch: 4,
        seed: 9,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_reproducible() {
    let scenes: Vec<_> = (0..2).map(|s| scene(s, 1, 300)).collect();
    let init = ModelParams::<f32>::init(small(Mode::Implicit), 1).unwrap();
    let (a, ha) = train(init.clone(), &scenes, &scenes, &quick()).unwrap();
    let (b, hb) = train(init.clone(), &scenes, &scenes, &quick()).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(ha, hb);
    assert_eq!(ha.step_losses.len(), 12);
    assert_eq!(ha.epochs.len(), 3);
    let other = TrainConfig { seed: 10, ..quick() };
    let (c, _) = train(init, &scenes, &scenes, &other).unwrap();
    assert_ne!(a.values, c.values);
}

#[test]
fn returned_parameters_have_the_best_validation_loss() {
    let scenes: Vec<_> = (0..2).map(|s| scene(s, 1, 300)).collect();
    let init = ModelParams::<f32>::init(small(Mode::Mixed), 2).unwrap();
    let (best, h) = train(init, &scenes, &scenes, &quick()).unwrap();
    let recorded = h.epochs.iter().map(|e| e.valid_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(h.best_valid_loss, recorded);
    assert!((evaluate_loss(&best, &scenes).unwrap() - recorded).abs() < 1e-12);
}

#[test]
fn a_few_steps_reduce_the_loss() {
    let scenes: Vec<_> = (0..2).map(|s| scene(s, 1, 300)).collect();
    let init = ModelParams::<f32>::init(small(Mode::Refinement), 3).unwrap();
    let before = evaluate_loss(&init, &scenes).unwrap();
    let cfg = TrainConfig { steps: 40, steps_per_epoch: 10, ..quick() };
    let (best, _) = train(init, &scenes, &scenes, &cfg).unwrap();
    assert!(evaluate_loss(&best, &scenes).unwrap() < before);
}

#[test]
fn training_rejects_empty_inputs() {
    let scenes = vec![scene(0, 1, 100)];
    let init = ModelParams::<f32>::init(small(Mode::Implicit), 1).unwrap();
    assert!(train(init.clone(), &[], &scenes, &quick()).is_err());
    assert!(train(init, &scenes, &scenes, &TrainConfig { batch_size: 0, ..quick() }).is_err());
}

#[test]
fn checkpoint_round_trip_reproduces_the_forward_pass() {
    let p = ModelParams::<f32>::init(small(Mode::Implicit), 4).unwrap();
    let mut metrics = BTreeMap::new();
    metrics.insert("best_valid_loss".to_string(), 0.25);
    let mut bytes = Vec::new();
    Checkpoint::new(&p, 4, metrics.clone()).write_to(&mut bytes).unwrap();
    let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back.header.metrics, metrics);
    assert_eq!(back.header.seed, 4);
    let s = scene(5, 1, 257);
    let d = s.directions[0];
    assert_eq!(separate(&p, &s.mixture, &d).unwrap(), separate(&back.params, &s.mixture, &d).unwrap());
}

#[test]
fn batched_inference_matches_single_calls() {
    let p = ModelParams::<f32>::init(small(Mode::Mixed), 6).unwrap();
    let s = scene(7, 1, 400);
    let targets = [s.directions[0], s.directions[1], Direction::new(1.0, 0.3).unwrap()];
    let many = separate_many(&p, &s.mixture, &targets).unwrap();
    for (t, y) in targets.iter().zip(&many) {
        assert_eq!(&separate(&p, &s.mixture, t).unwrap(), y);
    }
}

#[test]
fn network_output_depends_on_the_condition() {
    let p = ModelParams::<f64>::init(small(Mode::Implicit), 8).unwrap();
    let s = scene(8, 1, 300);
    let mix = s.mixture.cast::<f64>();
    let a = separate(&p, &mix, &s.directions[0]).unwrap();
    let b = separate(&p, &mix, &s.directions[1]).unwrap();
    assert_ne!(a, b);
    let r = ModelParams::<f64>::init(small(Mode::Refinement), 8).unwrap();
    let inp = ambisep_separator::assemble_input(&r.config, &mix, &s.directions[0]).unwrap();
    assert!(inp.condition.is_none());
    assert_eq!(forward(&r, &inp.tracks, None).unwrap().len(), 300);
}
