//! Zero-phase octave filter bank whose band responses sum to one.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub const NUM_BANDS: usize = 7;
pub const BAND_CENTERS: [f64; NUM_BANDS] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0];

/// Half-width of each crossover transition, in octaves. Each band keeps a
/// flat core of `1 − 2·TRANSITION_OCTAVES` octaves owned by no other band.
pub const TRANSITION_OCTAVES: f64 = 1.0 / 12.0;

/// Frequency-domain band masks for one FFT size.
#[derive(Debug, Clone)]
pub struct OctaveBands {
    nfft: usize,
    sample_rate: u32,
    /// `masks[b][k]` for bins `0..=nfft/2`.
    masks: Vec<Vec<f64>>,
}

/// Raised-cosine step in log-frequency: 1 below `fc·2^-w`, 0 above `fc·2^w`.
fn lowpass(f: f64, fc: f64, w: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    let x = (f / fc).log2();
    if x <= -w {
        1.0
    } else if x >= w {
        0.0
    } else {
        0.5 * (1.0 + (PI * (x + w) / (2.0 * w)).cos())
    }
}

impl OctaveBands {
    /// Masks for signals of up to `len` samples; `nfft` is padded so that
    /// the circular filtering does not wrap onto the kept samples.
    pub fn new(sample_rate: u32, len: usize) -> Self {
        let crossovers: Vec<f64> = BAND_CENTERS.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
        Self::build(sample_rate, len, |f, masks| {
            let lp: Vec<f64> = crossovers.iter().map(|&c| lowpass(f, c, TRANSITION_OCTAVES)).collect();
            masks[0] = lp[0];
            for b in 1..NUM_BANDS - 1 {
                masks[b] = lp[b] - lp[b - 1];
            }
            masks[NUM_BANDS - 1] = 1.0 - lp[NUM_BANDS - 2];
        })
    }

    /// Measurement filters: a squared Hann window in log-frequency spanning
    /// the flat core of each band of [`Self::new`], so no energy of a
    /// neighbouring band leaks in and the time response decays fast. They
    /// do not sum to one.
    pub fn analysis(sample_rate: u32, len: usize) -> Self {
        let half = (0.5 - TRANSITION_OCTAVES) / 2.0;
        Self::build(sample_rate, len, |f, masks| {
            for (m, &c) in masks.iter_mut().zip(&BAND_CENTERS) {
                let hp = 1.0 - lowpass(f, c * 2f64.powf(-half), half);
                *m = (hp * lowpass(f, c * 2f64.powf(half), half)).powi(2);
            }
        })
    }

    fn build(sample_rate: u32, len: usize, fill: impl Fn(f64, &mut [f64])) -> Self {
        let guard = (sample_rate as usize / 8).max(256);
        let nfft = (len + guard).next_power_of_two();
        let half = nfft / 2 + 1;
        let mut masks = vec![vec![0.0; half]; NUM_BANDS];
        let mut col = [0.0; NUM_BANDS];
        for k in 0..half {
            fill(k as f64 * sample_rate as f64 / nfft as f64, &mut col);
            for (m, &c) in masks.iter_mut().zip(&col) {
                m[k] = c;
            }
        }
        Self { nfft, sample_rate, masks }
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Mask value of band `b` at FFT bin `k` (any bin in `0..nfft`).
    pub fn mask(&self, b: usize, k: usize) -> f64 {
        let k = if k <= self.nfft / 2 { k } else { self.nfft - k };
        self.masks[b][k]
    }

    /// Real FFT spectrum of `x`, zero-padded to `nfft`.
    pub fn spectrum(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = (0..self.nfft).map(|i| Complex::new(x.get(i).copied().unwrap_or(0.0), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(self.nfft).process(&mut buf);
        buf
    }

    /// Inverse of [`Self::spectrum`], truncated to `len` samples.
    pub fn synthesize(&self, mut spec: Vec<Complex<f64>>, len: usize) -> Vec<f64> {
        FftPlanner::new().plan_fft_inverse(self.nfft).process(&mut spec);
        let scale = 1.0 / self.nfft as f64;
        spec.iter().take(len).map(|c| c.re * scale).collect()
    }

    /// Multiplies a spectrum by the mask of band `b`.
    pub fn apply_mask(&self, b: usize, spec: &[Complex<f64>]) -> Vec<Complex<f64>> {
        spec.iter().enumerate().map(|(k, &c)| c * self.mask(b, k)).collect()
    }

    /// Zero-phase band-pass of `x` into band `b`.
    pub fn filter(&self, x: &[f64], b: usize) -> Vec<f64> {
        let spec = self.spectrum(x);
        self.synthesize(self.apply_mask(b, &spec), x.len())
    }

    /// All bands of `x`; they sum back to `x`.
    pub fn split(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let spec = self.spectrum(x);
        (0..NUM_BANDS).map(|b| self.synthesize(self.apply_mask(b, &spec), x.len())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_sum_to_one_and_stay_in_range() {
        let fb = OctaveBands::new(16000, 5000);
        for k in 0..fb.nfft() {
            let s: f64 = (0..NUM_BANDS).map(|b| fb.mask(b, k)).sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!((0..NUM_BANDS).all(|b| (-1e-15..=1.0 + 1e-15).contains(&fb.mask(b, k))));
        }
    }

    #[test]
    fn bands_reconstruct_an_impulse() {
        let mut x = vec![0.0; 3000];
        x[700] = 1.0;
        x[1500] = -0.4;
        let fb = OctaveBands::new(32000, x.len());
        let bands = fb.split(&x);
        for i in 0..x.len() {
            let s: f64 = bands.iter().map(|b| b[i]).sum();
            assert!((s - x[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn centre_frequencies_pass_through_their_band() {
        let fb = OctaveBands::new(48000, 48000);
        for (b, &fc) in BAND_CENTERS.iter().enumerate() {
            let k = (fc * fb.nfft() as f64 / 48000.0).round() as usize;
            assert!(fb.mask(b, k) > 0.99, "band {b}");
        }
    }

    #[test]
    fn analysis_bands_stay_inside_the_flat_cores() {
        let fs = 48000;
        let synth = OctaveBands::new(fs, 20000);
        let an = OctaveBands::analysis(fs, 20000);
        for k in 0..synth.nfft() / 2 {
            for b in 0..NUM_BANDS {
                if an.mask(b, k) > 0.0 {
                    assert!(synth.mask(b, k) > 1.0 - 1e-12, "band {b} bin {k}");
                }
            }
        }
        let k = (1000.0 * an.nfft() as f64 / fs as f64).round() as usize;
        assert!(an.mask(3, k) > 0.99);
    }
}
