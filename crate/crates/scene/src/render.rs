//! Rendering scene specifications to Ambisonics mixtures.

use ambisep_core::encode::{encode_anechoic, encode_convolutive, ArirSet};
use ambisep_core::{AmbisonicsBuffer, Convention, Error, LabeledMixture, MonoBuffer, Real, Result};
use ambisep_room::render::direct_delay;
use ambisep_room::{render_drir, RenderOptions, RoomSpec};

use crate::corpus::StemCorpus;
use crate::spec::{Acoustics, SceneSpec};

/// Mixtures whose peak exceeds this are scaled down together with their truths.
pub const PEAK_LIMIT: f64 = 0.99;

/// Extra impulse-response length beyond mixing time plus the longest decay.
const DRIR_MARGIN: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct RenderedScene<T> {
    pub mixture: AmbisonicsBuffer<T>,
    /// Dry segments of active sources; zeros for inactive ones.
    pub truths: Vec<MonoBuffer<T>>,
    pub spec: SceneSpec,
    /// Global gain applied for peak safety (1 when none was needed).
    pub gain: f64,
}

impl<T: Real> RenderedScene<T> {
    pub fn into_labeled(self) -> Result<LabeledMixture<T>> {
        let dirs = self.spec.directions();
        let active = self.spec.sources.iter().map(|s| s.active).collect();
        LabeledMixture::new(format!("scene-{}", self.spec.scene_id), self.mixture, self.truths, dirs, active)
    }
}

/// Seed of the diffuse tail of source `i` in a scene.
fn tail_seed(scene_seed: u64, i: usize) -> u64 {
    scene_seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1))
}

/// Room response of source `i`, advanced so the direct path sits at sample 0
/// and stays aligned with the dry ground truth.
pub fn aligned_drir<T: Real>(room: &RoomSpec, i: usize, order: usize, scene_seed: u64) -> Result<AmbisonicsBuffer<T>> {
    let duration = room.mixing_time() + room.rt60.iter().copied().fold(0.0, f64::max) + DRIR_MARGIN;
    let opts = RenderOptions { seed: tail_seed(scene_seed, i), ..RenderOptions::default() };
    let h: AmbisonicsBuffer<T> = render_drir(room, i, order, duration, opts)?;
    let d = direct_delay(room, i);
    let channels = h.channels().iter().map(|c| c[d..].to_vec()).collect();
    AmbisonicsBuffer::new(order, h.sample_rate(), Convention::Orthonormal, channels)
}

pub fn render_scene<T: Real>(spec: &SceneSpec, corpus: &StemCorpus) -> Result<RenderedScene<T>> {
    if corpus.sample_rate() != spec.sample_rate {
        return Err(Error::SampleRate(spec.sample_rate, corpus.sample_rate()));
    }
    let len = spec.samples;
    let truths: Vec<MonoBuffer<T>> =
        spec.sources
            .iter()
            .map(|s| {
                if s.active {
                    corpus.segment(&s.stem, s.start, len).map(|b| b.cast())
                } else {
                    Ok(MonoBuffer::zeros(len, spec.sample_rate))
                }
            })
            .collect::<Result<_>>()?;
    let active: Vec<usize> = (0..spec.sources.len()).filter(|&i| spec.sources[i].active).collect();
    let mut mixture = match &spec.acoustics {
        Acoustics::Anechoic => {
            let srcs: Vec<_> = active.iter().map(|&i| (truths[i].clone(), spec.sources[i].direction)).collect();
            if srcs.is_empty() {
                AmbisonicsBuffer::zeros(spec.order, len, spec.sample_rate)
            } else {
                encode_anechoic(&srcs, spec.order)?
            }
        }
        Acoustics::Room { room } => {
            if active.is_empty() {
                AmbisonicsBuffer::zeros(spec.order, len, spec.sample_rate)
            } else {
                let drirs = active.iter().map(|&i| aligned_drir(room, i, spec.order, spec.seed)).collect::<Result<Vec<_>>>()?;
                let dry: Vec<_> = active.iter().map(|&i| truths[i].clone()).collect();
                encode_convolutive(&dry, &ArirSet::new(drirs)?)?
            }
        }
    };
    let peak = truths.iter().flat_map(|t| t.samples().iter().map(|v| v.to_f64_lossy().abs())).fold(mixture.peak(), f64::max);
    let mut gain = 1.0;
    let mut truths = truths;
    if peak > PEAK_LIMIT {
        gain = PEAK_LIMIT / peak;
        mixture.scale_in_place(T::lit(gain));
        truths = truths.iter().map(|t| t.scaled(T::lit(gain))).collect();
    }
    Ok(RenderedScene { mixture, truths, spec: spec.clone(), gain })
}
