//! Inference: steering a trained network to a direction.

use ambisep_core::evaluation::Method;
use ambisep_core::{AmbisonicsBuffer, Direction, LabeledMixture, MonoBuffer, Real, Result};
use rayon::prelude::*;

use crate::input::assemble_input;
use crate::model::{forward, ModelParams};

/// Single-channel estimate of the signal arriving from `target`, at the
/// standardized input scale. A mixture with zero standardization statistic
/// yields silence.
pub fn separate<T: Real>(p: &ModelParams<T>, mix: &AmbisonicsBuffer<T>, target: &Direction) -> Result<MonoBuffer<T>> {
    let inp = assemble_input(&p.config, mix, target)?;
    if inp.silent {
        return Ok(MonoBuffer::zeros(mix.len(), mix.sample_rate()));
    }
    let y = forward(p, &inp.tracks, inp.condition.map(|c| c.as_array()))?;
    MonoBuffer::new(y, mix.sample_rate())
}

/// [`separate`] for several directions in parallel.
pub fn separate_many<T: Real>(p: &ModelParams<T>, mix: &AmbisonicsBuffer<T>, targets: &[Direction]) -> Result<Vec<MonoBuffer<T>>> {
    targets.par_iter().map(|d| separate(p, mix, d)).collect()
}

/// Trained network as an evaluation method.
pub struct NetworkMethod<T> {
    pub name: String,
    pub params: ModelParams<T>,
}

impl<T: Real> Method<T> for NetworkMethod<T> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn predict(&self, scene: &LabeledMixture<T>, target: &Direction) -> Result<MonoBuffer<T>> {
        let mix = if scene.mixture.order() > self.params.config.order {
            scene.mixture.truncated(self.params.config.order)?
        } else {
            scene.mixture.clone()
        };
        separate(&self.params, &mix, target)
    }
}
