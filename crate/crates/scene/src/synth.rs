//! Synthetic stem corpus for tests and demos: every group holds four
//! stylized instrument stems (bass, drums, voice, pad).

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use ambisep_core::wav::write_mono;
use ambisep_core::{MonoBuffer, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{Split, StemCorpus};

pub const STEM_NAMES: [&str; 4] = ["bass", "drums", "voice", "pad"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    /// Groups (songs) per split: train, valid, test.
    pub groups: [usize; 3],
    pub stems_per_group: usize,
    pub duration: f64,
    pub sample_rate: u32,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { groups: [8, 2, 2], stems_per_group: 4, duration: 8.0, sample_rate: 16000, seed: 0 }
    }
}

fn note_sequence(rng: &mut ChaCha8Rng, len: usize, fs: f64, lo: f64, hi: f64, note_len: f64) -> Vec<f64> {
    let per = (note_len * fs) as usize;
    let mut f = vec![0.0; len];
    let mut cur = rng.random_range(lo..hi);
    for (i, v) in f.iter_mut().enumerate() {
        if i % per.max(1) == 0 {
            cur = rng.random_range(lo..hi);
        }
        *v = cur;
    }
    f
}

fn harmonic(freqs: &[f64], fs: f64, harmonics: usize, rolloff: f64) -> Vec<f64> {
    let mut phase = 0.0;
    freqs
        .iter()
        .map(|&f| {
            phase += 2.0 * PI * f / fs;
            (1..=harmonics).filter(|&h| (h as f64) * f < fs / 2.0).map(|h| (h as f64 * phase).sin() / (h as f64).powf(rolloff)).sum()
        })
        .collect()
}

/// One stem of kind `kind` (index into [`STEM_NAMES`]), peak-normalized to 0.5.
pub fn synth_stem(kind: usize, len: usize, sample_rate: u32, seed: u64) -> Vec<f64> {
    let fs = sample_rate as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = match kind % 4 {
        0 => {
            let f = note_sequence(&mut rng, len, fs, 45.0, 110.0, 0.5);
            harmonic(&f, fs, 6, 1.5)
        }
        1 => {
            let rate = rng.random_range(3.0..6.0);
            let mut env = 0.0;
            let decay = (-1.0 / (0.04 * fs)).exp();
            (0..len)
                .map(|_| {
                    if rng.random::<f64>() < rate / fs {
                        env = 1.0;
                    }
                    env *= decay;
                    env * Distribution::<f64>::sample(&StandardNormal, &mut rng)
                })
                .collect()
        }
        2 => {
            let mut f = note_sequence(&mut rng, len, fs, 150.0, 420.0, 0.35);
            let vib = rng.random_range(4.0..7.0);
            for (i, v) in f.iter_mut().enumerate() {
                *v *= 1.0 + 0.01 * (2.0 * PI * vib * i as f64 / fs).sin();
            }
            let syl = rng.random_range(2.5..5.0);
            harmonic(&f, fs, 12, 1.0)
                .into_iter()
                .enumerate()
                .map(|(i, v)| v * (0.5 - 0.5 * (2.0 * PI * syl * i as f64 / fs).cos()))
                .collect()
        }
        _ => {
            let tones: Vec<(f64, f64)> = (0..3).map(|_| (rng.random_range(300.0..2000.0), rng.random_range(0.0..2.0 * PI))).collect();
            let trem = rng.random_range(0.3..1.5);
            (0..len)
                .map(|i| {
                    let t = i as f64 / fs;
                    let s: f64 = tones.iter().map(|(f, p)| (2.0 * PI * f * t + p).sin()).sum();
                    s * (0.75 + 0.25 * (2.0 * PI * trem * t).sin())
                })
                .collect()
        }
    };
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    x
}

/// Writes `<root>/<split>/<group>/<stem>.wav` plus the index and returns the corpus.
pub fn synth_corpus(root: &Path, opts: &SynthOptions) -> Result<StemCorpus> {
    let len = (opts.duration * opts.sample_rate as f64).round() as usize;
    let mut counter = 0u64;
    for (split, &groups) in Split::ALL.iter().zip(&opts.groups) {
        for g in 0..groups {
            let dir = root.join(split.as_str()).join(format!("song{g:03}"));
            fs::create_dir_all(&dir)?;
            for s in 0..opts.stems_per_group {
                counter += 1;
                let x = synth_stem(s, len, opts.sample_rate, opts.seed.wrapping_mul(1_000_003).wrapping_add(counter));
                let buf = MonoBuffer::new(x.into_iter().map(|v| v as f32).collect(), opts.sample_rate)?;
                let name = STEM_NAMES.get(s).map_or_else(|| format!("stem{s}"), |n| n.to_string());
                write_mono(&dir.join(format!("{name}.wav")), &buf)?;
            }
        }
    }
    let corpus = StemCorpus::scan(root)?;
    corpus.save_index()?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_deterministic_and_bounded() {
        for kind in 0..4 {
            let a = synth_stem(kind, 4000, 8000, 9);
            assert_eq!(a, synth_stem(kind, 4000, 8000, 9));
            assert!(a.iter().all(|v| v.abs() <= 0.5 + 1e-12));
            assert!(a.iter().map(|v| v * v).sum::<f64>() > 1.0);
        }
    }
}
