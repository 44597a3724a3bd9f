//! Directional room impulse responses in the spherical-harmonic domain.

use ambisep_core::sh::sh_eval;
use ambisep_core::{AmbisonicsBuffer, Convention, Error, Real, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::bands::{OctaveBands, NUM_BANDS};
use crate::image::{image_sources, MAX_IMAGE_ORDER};
use crate::spec::RoomSpec;

/// Length of the early-to-late crossfade, in seconds.
pub const CROSSFADE: f64 = 0.010;

/// `ln(10³)`: amplitude decay constant for a 60 dB energy drop.
const DECAY_60DB: f64 = 6.907755278982137;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub max_order: usize,
    pub include_tail: bool,
    /// Scale so the direct path has unit gain (the `1/r` of the direct path is removed).
    pub normalize_direct: bool,
    /// Seed of the diffuse tail noise.
    pub seed: u64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { max_order: MAX_IMAGE_ORDER, include_tail: true, normalize_direct: true, seed: 0 }
    }
}

/// Sample index of the direct path of source `src`.
pub fn direct_delay(room: &RoomSpec, src: usize) -> usize {
    (room.source_distance(src) / room.speed_of_sound * room.sample_rate as f64).round() as usize
}

fn raised_cosine_fade(t: usize, start: usize, width: usize) -> f64 {
    if t < start {
        0.0
    } else if t >= start + width {
        1.0
    } else {
        0.5 * (1.0 - (std::f64::consts::PI * (t - start) as f64 / width as f64).cos())
    }
}

/// Renders the SH-domain impulse response from source `src` to the receiver.
///
/// Early part: band-filtered image sources, each encoded as `gain·y_N(θ)` at
/// its rounded propagation delay. Late part: i.i.d. Gaussian noise per SH
/// channel, shaped per band by `exp(−6.908 (t − t_x)/T_b)`, where `t_x` is the
/// mixing time after the direct-path arrival. The tail level per band matches
/// the omni image-source energy over the crossfade window. Samples before the
/// direct path are zero.
pub fn render_drir<T: Real>(room: &RoomSpec, src: usize, order: usize, duration: f64, opts: RenderOptions) -> Result<AmbisonicsBuffer<T>> {
    room.validate()?;
    if src >= room.sources.len() {
        return Err(Error::Domain(format!("no source {src}")));
    }
    if order > ambisep_core::MAX_ORDER {
        return Err(Error::UnsupportedOrder { order, max: ambisep_core::MAX_ORDER });
    }
    let max_rt = room.rt60.iter().copied().fold(0.0, f64::max);
    if !(duration >= room.mixing_time() + max_rt) {
        return Err(Error::Domain(format!(
            "duration {duration} s is shorter than mixing time plus longest reverberation time ({} s)",
            room.mixing_time() + max_rt
        )));
    }
    let fs = room.sample_rate as f64;
    let len = (duration * fs).round() as usize;
    let m = (order + 1) * (order + 1);
    let bands = OctaveBands::new(room.sample_rate, len);

    let images = image_sources(room, src, opts.max_order)?;
    let taps: Vec<(usize, Vec<f64>, [f64; NUM_BANDS])> = images
        .iter()
        .map(|im| {
            let delay = (im.distance / room.speed_of_sound * fs).round() as usize;
            let y = sh_eval::<f64>(order, &im.direction).map(|v| v.into_coeffs());
            y.map(|y| (delay, y, std::array::from_fn(|b| im.amplitude(b))))
        })
        .collect::<Result<_>>()?;
    let t_direct = direct_delay(room, src);

    // Per channel: spectrum of each band's impulse train, masked and summed.
    let band_spectra = |c: usize| -> Vec<Vec<Complex<f64>>> {
        (0..NUM_BANDS)
            .map(|b| {
                let mut train = vec![0.0; len];
                for (delay, y, amp) in &taps {
                    if *delay < len {
                        train[*delay] += amp[b] * y[c];
                    }
                }
                bands.apply_mask(b, &bands.spectrum(&train))
            })
            .collect()
    };
    let mut early: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|c| {
            let specs = band_spectra(c);
            let mut total = vec![Complex::new(0.0, 0.0); bands.nfft()];
            for s in &specs {
                total.iter_mut().zip(s).for_each(|(a, b)| *a += b);
            }
            bands.synthesize(total, len)
        })
        .collect();

    if opts.include_tail {
        let t_x = t_direct + (room.mixing_time() * fs).round() as usize;
        let fade_len = ((CROSSFADE * fs).round() as usize).max(1);
        if t_x < len {
            let early_omni_bands: Vec<Vec<f64>> = band_spectra(0).into_iter().map(|s| bands.synthesize(s, len)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let noise: Vec<Vec<f64>> = (0..m).map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
            let envelope = |b: usize, t: usize| -> f64 {
                if t < t_x {
                    0.0
                } else {
                    (-DECAY_60DB * (t - t_x) as f64 / fs / room.rt60[b]).exp()
                }
            };
            let omni_noise_bands = bands.split(&noise[0]);
            let mut gains = [0.0; NUM_BANDS];
            for b in 0..NUM_BANDS {
                let mut end = (t_x + fade_len).min(len);
                loop {
                    let e_img: f64 = early_omni_bands[b][t_x..end].iter().map(|v| v * v).sum();
                    let e_tail: f64 = (t_x..end).map(|t| (envelope(b, t) * omni_noise_bands[b][t]).powi(2)).sum();
                    if e_img > 0.0 && e_tail > 0.0 {
                        gains[b] = (e_img / e_tail).sqrt();
                        break;
                    }
                    if end == len {
                        break;
                    }
                    end = (t_x + 2 * (end - t_x)).min(len);
                }
            }
            let tails: Vec<Vec<f64>> = noise
                .par_iter()
                .map(|n| {
                    let spec = bands.spectrum(n);
                    let mut out = vec![0.0; len];
                    for (b, &g) in gains.iter().enumerate() {
                        if g == 0.0 {
                            continue;
                        }
                        let nb = bands.synthesize(bands.apply_mask(b, &spec), len);
                        for t in t_x..len {
                            out[t] += g * envelope(b, t) * nb[t];
                        }
                    }
                    out
                })
                .collect();
            for (e, tail) in early.iter_mut().zip(&tails) {
                for t in t_x..len {
                    let f = raised_cosine_fade(t, t_x, fade_len);
                    e[t] = (1.0 - f) * e[t] + f * tail[t];
                }
            }
        }
    }

    let scale = if opts.normalize_direct { room.source_distance(src) } else { 1.0 };
    let channels = early
        .into_iter()
        .map(|ch| ch.into_iter().enumerate().map(|(t, v)| if t < t_direct { T::zero() } else { T::lit(v * scale) }).collect())
        .collect();
    AmbisonicsBuffer::new(order, room.sample_rate, Convention::Orthonormal, channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::sample_room;
    use ambisep_core::sh::sh_eval;
    use std::f64::consts::PI;

    fn opts(max_order: usize, tail: bool, norm: bool) -> RenderOptions {
        RenderOptions { max_order, include_tail: tail, normalize_direct: norm, seed: 1 }
    }

    #[test]
    fn direct_path_only_is_a_scaled_impulse() {
        let room = sample_room(11, 1, 16000);
        let h: AmbisonicsBuffer<f64> = render_drir(&room, 0, 0, 0.6, opts(0, false, false)).unwrap();
        let d = direct_delay(&room, 0);
        let expected = 1.0 / (4.0 * PI).sqrt() / room.source_distance(0);
        let w = h.channel(0);
        assert!((w[d] - expected).abs() < 1e-9);
        let rest: f64 = w.iter().enumerate().filter(|&(t, _)| t != d).map(|(_, v)| v.abs()).fold(0.0, f64::max);
        assert!(rest < 1e-9, "{rest}");
    }

    #[test]
    fn normalized_direct_path_matches_the_encoder() {
        let room = sample_room(12, 2, 16000);
        let h: AmbisonicsBuffer<f64> = render_drir(&room, 1, 3, 0.6, opts(0, false, true)).unwrap();
        let y = sh_eval::<f64>(3, &room.source_direction(1).unwrap()).unwrap();
        let d = direct_delay(&room, 1);
        for (c, &yc) in y.coeffs().iter().enumerate() {
            assert!((h.channel(c)[d] - yc).abs() < 1e-9);
        }
    }

    #[test]
    fn first_nonzero_sample_is_the_direct_path() {
        let room = sample_room(13, 1, 16000);
        let h: AmbisonicsBuffer<f32> = render_drir(&room, 0, 1, 0.7, RenderOptions::default()).unwrap();
        let first = h.channel(0).iter().position(|&v| v != 0.0).unwrap();
        assert_eq!(first, direct_delay(&room, 0));
    }

    #[test]
    fn rendering_is_deterministic() {
        let room = sample_room(14, 1, 16000);
        let a: AmbisonicsBuffer<f32> = render_drir(&room, 0, 2, 0.7, RenderOptions::default()).unwrap();
        let b: AmbisonicsBuffer<f32> = render_drir(&room, 0, 2, 0.7, RenderOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn short_duration_is_rejected() {
        let room = sample_room(15, 1, 16000);
        assert!(render_drir::<f64>(&room, 0, 1, 0.05, RenderOptions::default()).is_err());
        assert!(render_drir::<f64>(&room, 3, 1, 1.0, RenderOptions::default()).is_err());
    }

    #[test]
    fn tail_is_isotropic() {
        let room = sample_room(16, 1, 16000);
        let h: AmbisonicsBuffer<f64> = render_drir(&room, 0, 2, 0.8, RenderOptions::default()).unwrap();
        let start = direct_delay(&room, 0) + ((room.mixing_time() + 2.0 * CROSSFADE) * 16000.0) as usize;
        let powers: Vec<f64> = h.channels().iter().map(|c| c[start..].iter().map(|v| v * v).sum()).collect();
        let mean = powers.iter().sum::<f64>() / powers.len() as f64;
        for p in &powers {
            assert!((p / mean - 1.0).abs() < 0.1, "{powers:?}");
        }
    }

    #[test]
    fn shorter_reverberation_gives_less_energy() {
        let mut room = sample_room(17, 1, 16000);
        room.rt60 = [0.5; NUM_BANDS];
        let long: AmbisonicsBuffer<f64> = render_drir(&room, 0, 0, 0.8, RenderOptions::default()).unwrap();
        room.rt60 = [0.2; NUM_BANDS];
        let short: AmbisonicsBuffer<f64> = render_drir(&room, 0, 0, 0.8, RenderOptions::default()).unwrap();
        let e = |h: &AmbisonicsBuffer<f64>| h.channel(0).iter().map(|v| v * v).sum::<f64>();
        assert!(e(&short) < e(&long));
        assert!(e(&short).is_finite());
    }
}
