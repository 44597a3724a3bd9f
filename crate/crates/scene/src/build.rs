//! Drawing scene specifications from a corpus under a policy.

use ambisep_core::{Direction, Error, Result};
use ambisep_room::spec::sample_room_with;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::StemCorpus;
use crate::directions::{min_separation, sample_directions, REJECTION_BUDGET};
use crate::spec::{Acoustics, AcousticsPolicy, SceneManifest, ScenePolicy, SceneSpec, SourceCount, SourceSlot};

/// Attempts per scene before the draw is declared infeasible.
pub const SCENE_BUDGET: usize = 100;

/// Mixtures at or below this RMS are redrawn.
pub const SILENCE_RMS: f64 = 1e-6;

/// Independent random stream of scene `scene_id` under `master_seed`.
pub fn scene_rng(master_seed: u64, scene_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(scene_id);
    rng
}

fn draw_count(count: SourceCount, rng: &mut ChaCha8Rng) -> usize {
    match count {
        SourceCount::Fixed { k } => k,
        SourceCount::Uniform { min, max } => rng.random_range(min..=max),
    }
}

/// Picks `k` stems and offsets; `None` when the split cannot supply them.
fn draw_stems(corpus: &StemCorpus, policy: &ScenePolicy, k: usize, len: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(String, usize)>> {
    if policy.same_group {
        let groups: Vec<_> = corpus.groups(policy.split, len).into_values().filter(|g| g.len() >= k).collect();
        if groups.is_empty() {
            return None;
        }
        let group = &groups[rng.random_range(0..groups.len())];
        let shortest = group.iter().map(|e| e.samples).min().expect("nonempty group");
        let start = rng.random_range(0..=shortest - len);
        let mut picks: Vec<usize> = sample(rng, group.len(), k).into_vec();
        picks.sort_unstable();
        Some(picks.into_iter().map(|i| (group[i].id.clone(), start)).collect())
    } else {
        let pool = corpus.split_entries(policy.split, len);
        if pool.len() < k {
            return None;
        }
        let picks = sample(rng, pool.len(), k).into_vec();
        Some(
            picks
                .into_iter()
                .map(|i| {
                    let e = pool[i];
                    (e.id.clone(), rng.random_range(0..=e.samples - len))
                })
                .collect(),
        )
    }
}

fn mixture_rms(corpus: &StemCorpus, stems: &[(String, usize)], active: &[bool], len: usize) -> Result<f64> {
    let mut energy = 0.0;
    for ((id, start), _) in stems.iter().zip(active).filter(|(_, &a)| a) {
        energy += corpus.segment(id, *start, len)?.energy();
    }
    Ok((energy / len as f64).sqrt())
}

/// Directions, and the room they came from for reverberant scenes.
fn draw_geometry(
    policy: &ScenePolicy,
    k: usize,
    sample_rate: u32,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Direction>, Option<ambisep_room::RoomSpec>)> {
    match policy.acoustics {
        AcousticsPolicy::Anechoic => Ok((sample_directions(k, policy.min_separation_deg, rng)?, None)),
        AcousticsPolicy::Room => {
            let sep = policy.min_separation_deg.to_radians();
            for _ in 0..REJECTION_BUDGET {
                let room = sample_room_with(rng, k, sample_rate);
                let dirs = (0..k).map(|i| room.source_direction(i)).collect::<Result<Vec<_>>>()?;
                if min_separation(&dirs) >= sep {
                    return Ok((dirs, Some(room)));
                }
            }
            Err(Error::Domain(format!("could not place {k} room sources {}° apart", policy.min_separation_deg)))
        }
    }
}

/// Draws scene `scene_id`. The result depends only on the corpus, the
/// policy, `master_seed` and `scene_id`.
pub fn build_scene(corpus: &StemCorpus, policy: &ScenePolicy, master_seed: u64, scene_id: u64) -> Result<SceneSpec> {
    policy.validate()?;
    let fs = corpus.sample_rate();
    let len = (policy.duration * fs as f64).round() as usize;
    let mut rng = scene_rng(master_seed, scene_id);
    let seed: u64 = rng.random();
    for _ in 0..SCENE_BUDGET {
        let k = draw_count(policy.sources, &mut rng);
        let stems = draw_stems(corpus, policy, k, len, &mut rng)
            .ok_or_else(|| Error::Empty(format!("the {} split has too few stems of {len} samples for {k} sources", policy.split)))?;
        let mut active = vec![true; k];
        if k >= 2 && rng.random::<f64>() < policy.silent_fraction {
            active[rng.random_range(0..k)] = false;
        }
        if active.iter().filter(|&&a| a).count() < policy.min_active {
            continue;
        }
        let (dirs, room) = draw_geometry(policy, k, fs, &mut rng)?;
        if mixture_rms(corpus, &stems, &active, len)? <= SILENCE_RMS {
            continue;
        }
        let sources = stems
            .into_iter()
            .zip(dirs)
            .zip(active)
            .map(|(((stem, start), direction), active)| SourceSlot { stem, start, direction, active })
            .collect();
        let acoustics = match room {
            Some(room) => Acoustics::Room { room },
            None => Acoustics::Anechoic,
        };
        return Ok(SceneSpec {
            scene_id,
            split: policy.split,
            sources,
            samples: len,
            sample_rate: fs,
            acoustics,
            order: policy.order,
            seed,
        });
    }
    Err(Error::Domain(format!("scene {scene_id}: no admissible draw in {SCENE_BUDGET} attempts")))
}

/// Scenes `0..count`, drawn in parallel.
pub fn build_scenes(corpus: &StemCorpus, policy: &ScenePolicy, master_seed: u64, count: usize) -> Result<SceneManifest> {
    let scenes = (0..count as u64).into_par_iter().map(|id| build_scene(corpus, policy, master_seed, id)).collect::<Result<Vec<_>>>()?;
    Ok(SceneManifest { version: env!("CARGO_PKG_VERSION").into(), master_seed, policy: policy.clone(), scenes })
}
