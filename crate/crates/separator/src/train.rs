//! L1 loss, Adam, the plateau learning-rate schedule and the training loop.

use ambisep_core::{Error, LabeledMixture, Real, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::input::{assemble_input, perturb_target};
use crate::model::{backward, forward, forward_cached, ModelParams};

/// Mean absolute error.
pub fn loss_l1<T: Real>(est: &[T], truth: &[T]) -> f64 {
    assert_eq!(est.len(), truth.len(), "loss operands differ in length");
    if est.is_empty() {
        return 0.0;
    }
    est.iter().zip(truth).map(|(&e, &t)| (e - t).abs().to_f64_lossy()).sum::<f64>() / est.len() as f64
}

/// Subgradient of [`loss_l1`] w.r.t. `est`; zero where the residual vanishes.
pub fn loss_l1_grad<T: Real>(est: &[T], truth: &[T]) -> Vec<T> {
    let inv = T::lit(1.0 / est.len().max(1) as f64);
    est.iter()
        .zip(truth)
        .map(|(&e, &t)| {
            let r = e - t;
            if r > T::zero() {
                inv
            } else if r < T::zero() {
                -inv
            } else {
                T::zero()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Adam with bias correction; moments kept in `f64`.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, n: usize) -> Self {
        Self { config, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step<T: Real>(&mut self, params: &mut [T], grads: &[f64]) {
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let upd = lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            *p = T::lit(p.to_f64_lossy() - upd);
        }
    }
}

/// Multiplies the learning rate by `factor` once `patience` epochs pass
/// without a new best validation loss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlateauScheduler {
    pub patience: usize,
    pub factor: f64,
    best: f64,
    bad_epochs: usize,
}

impl PlateauScheduler {
    pub fn new(patience: usize, factor: f64) -> Self {
        Self { patience, factor, best: f64::INFINITY, bad_epochs: 0 }
    }

    /// Records an epoch's validation loss; returns the factor to apply to the lr.
    pub fn observe(&mut self, loss: f64) -> Option<f64> {
        if loss < self.best {
            self.best = loss;
            self.bad_epochs = 0;
            return None;
        }
        self.bad_epochs += 1;
        if self.bad_epochs >= self.patience {
            self.bad_epochs = 0;
            Some(self.factor)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub steps: usize,
    /// Optimizer steps per epoch; validation and scheduling happen per epoch.
    pub steps_per_epoch: usize,
    pub patience: usize,
    pub lr_factor: f64,
    /// Cap radius of the target perturbation in degrees.
    pub window_deg: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size: 16,
            steps: 1000,
            steps_per_epoch: 100,
            patience: 10,
            lr_factor: 0.1,
            window_deg: 2.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Mean batch loss of every optimizer step.
    pub step_losses: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_valid_loss: f64,
}

struct Item {
    scene: usize,
    source: usize,
    target: ambisep_core::Direction,
}

/// Loss and gradient of one (scene, source, direction) sample.
fn item_grad<T: Real>(p: &ModelParams<T>, scene: &LabeledMixture<T>, k: usize, target: &ambisep_core::Direction) -> Result<(f64, Vec<T>)> {
    let inp = assemble_input(&p.config, &scene.mixture, target)?;
    let inv = T::lit(1.0 / inp.scale);
    let truth: Vec<T> = scene.truths[k].samples().iter().map(|&v| v * inv).collect();
    let theta = inp.condition.map(|c| c.as_array());
    let (est, cache) = forward_cached(p, &inp.tracks, theta)?;
    let loss = loss_l1(&est, &truth);
    let g = backward(p, &cache, &loss_l1_grad(&est, &truth));
    Ok((loss, g))
}

/// Mean L1 loss over every source of every scene at the labeled directions.
pub fn evaluate_loss<T: Real>(p: &ModelParams<T>, scenes: &[LabeledMixture<T>]) -> Result<f64> {
    let pairs: Vec<(usize, usize)> = scenes.iter().enumerate().flat_map(|(i, s)| (0..s.directions.len()).map(move |k| (i, k))).collect();
    if pairs.is_empty() {
        return Err(Error::Empty("no sources to evaluate".into()));
    }
    let losses = pairs
        .par_iter()
        .map(|&(i, k)| {
            let s = &scenes[i];
            let inp = assemble_input(&p.config, &s.mixture, &s.directions[k])?;
            let inv = T::lit(1.0 / inp.scale);
            let truth: Vec<T> = s.truths[k].samples().iter().map(|&v| v * inv).collect();
            let est = forward(p, &inp.tracks, inp.condition.map(|c| c.as_array()))?;
            Ok(loss_l1(&est, &truth))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Trains from `init` and returns the parameters with the lowest validation
/// loss. Each step draws `batch_size` (scene, source) pairs, including
/// silenced sources, perturbs the target direction and averages the
/// per-item gradients in draw order, so results do not depend on the
/// thread count.
pub fn train<T: Real>(
    init: ModelParams<T>,
    train_scenes: &[LabeledMixture<T>],
    valid_scenes: &[LabeledMixture<T>],
    cfg: &TrainConfig,
) -> Result<(ModelParams<T>, History)> {
    if train_scenes.is_empty() || valid_scenes.is_empty() {
        return Err(Error::Empty("training and validation scenes".into()));
    }
    if train_scenes.iter().any(|s| s.directions.is_empty()) {
        return Err(Error::Empty("training scene without sources".into()));
    }
    if cfg.batch_size == 0 || cfg.steps_per_epoch == 0 {
        return Err(Error::Domain("batch size and steps per epoch must be positive".into()));
    }
    let mut params = init;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(cfg.adam, params.values.len());
    let mut sched = PlateauScheduler::new(cfg.patience, cfg.lr_factor);
    let mut history = History { best_valid_loss: f64::INFINITY, ..History::default() };
    let mut best = params.clone();
    let mut epoch_losses = Vec::new();

    for step in 0..cfg.steps {
        let items: Vec<Item> = (0..cfg.batch_size)
            .map(|_| {
                let scene = rng.random_range(0..train_scenes.len());
                let source = rng.random_range(0..train_scenes[scene].directions.len());
                let target = perturb_target(&train_scenes[scene].directions[source], cfg.window_deg, &mut rng);
                Item { scene, source, target }
            })
            .collect();
        let results =
            items.par_iter().map(|it| item_grad(&params, &train_scenes[it.scene], it.source, &it.target)).collect::<Result<Vec<_>>>()?;
        let mut grad = vec![0.0f64; params.values.len()];
        let mut loss = 0.0;
        for (l, g) in &results {
            loss += l;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b.to_f64_lossy();
            }
        }
        let n = results.len() as f64;
        loss /= n;
        grad.iter_mut().for_each(|g| *g /= n);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Domain(format!("training diverged at step {step}: loss {loss}")));
        }
        adam.step(&mut params.values, &grad);
        history.step_losses.push(loss);
        epoch_losses.push(loss);

        if (step + 1) % cfg.steps_per_epoch == 0 || step + 1 == cfg.steps {
            let epoch = history.epochs.len() + 1;
            let valid_loss = evaluate_loss(&params, valid_scenes)?;
            if !valid_loss.is_finite() {
                return Err(Error::Domain(format!("validation loss is {valid_loss} after epoch {epoch}")));
            }
            if valid_loss < history.best_valid_loss {
                history.best_valid_loss = valid_loss;
                history.best_epoch = Some(epoch);
                best = params.clone();
            }
            let train_loss = epoch_losses.iter().sum::<f64>() / epoch_losses.len() as f64;
            epoch_losses.clear();
            history.epochs.push(EpochRecord { epoch, train_loss, valid_loss, lr: adam.config.lr });
            if let Some(f) = sched.observe(valid_loss) {
                adam.config.lr *= f;
            }
        }
    }
    Ok((best, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_examples() {
        let t = [0.1, -0.4, 2.0];
        assert_eq!(loss_l1(&t, &t), 0.0);
        let e: Vec<f64> = t.iter().map(|v| v + 0.5).collect();
        assert!((loss_l1(&e, &t) - 0.5).abs() < 1e-15);
        assert_eq!(loss_l1(&[0.0; 4], &[0.0; 4]), 0.0);
        assert_eq!(loss_l1_grad(&[1.0, 0.0, -1.0], &[0.0, 0.0, 0.0]), vec![1.0 / 3.0, 0.0, -1.0 / 3.0]);
    }

    #[test]
    fn plateau_drops_once_at_epoch_eleven() {
        let mut s = PlateauScheduler::new(10, 0.1);
        let drops: Vec<usize> = (1..=20).filter_map(|e| s.observe(1.0).map(|_| e)).collect();
        assert_eq!(drops, vec![11]);
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut a = Adam::new(AdamConfig::default(), 2);
        let mut p = [1.0f64, -1.0];
        a.step(&mut p, &[3.0, -0.01]);
        assert!((p[0] - (1.0 - 1e-4)).abs() < 1e-9);
        assert!((p[1] - (-1.0 + 1e-4)).abs() < 1e-9);
    }
}
