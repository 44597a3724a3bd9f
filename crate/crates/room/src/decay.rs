//! Schroeder backward integration and reverberation-time estimation.

use crate::bands::OctaveBands;

/// Energy decay curve in dB, 0 dB at the first sample.
pub fn schroeder_curve(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut edc: Vec<f64> = x
        .iter()
        .rev()
        .map(|v| {
            acc += v * v;
            acc
        })
        .collect();
    edc.reverse();
    let total = edc.first().copied().unwrap_or(0.0);
    edc.iter().map(|&e| if total > 0.0 && e > 0.0 { 10.0 * (e / total).log10() } else { f64::NEG_INFINITY }).collect()
}

/// Decay-curve range of the reverberation-time fit, in dB. Rendered
/// responses have no noise floor, so the fit uses most of the decay; short
/// ranges leave too few degrees of freedom in the low bands of small rooms.
pub const FIT_RANGE_DB: (f64, f64) = (-5.0, -85.0);

/// Reverberation time from the least-squares slope of the Schroeder curve
/// over [`FIT_RANGE_DB`], extrapolated to 60 dB. With `band`, `x` is first
/// passed through the analysis filter of that octave band.
pub fn schroeder_rt60(x: &[f64], sample_rate: u32, band: Option<usize>) -> Option<f64> {
    let filtered;
    let sig = match band {
        Some(b) => {
            filtered = OctaveBands::analysis(sample_rate, x.len()).filter(x, b);
            &filtered
        }
        None => x,
    };
    let edc = schroeder_curve(sig);
    let i0 = edc.iter().position(|&v| v <= FIT_RANGE_DB.0)?;
    let i1 = edc.iter().position(|&v| v <= FIT_RANGE_DB.1)?;
    if i1 <= i0 + 1 {
        return None;
    }
    let n = (i1 - i0) as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (i, &y) in edc.iter().enumerate().take(i1).skip(i0) {
        let t = i as f64 / sample_rate as f64;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    (slope < 0.0).then(|| -60.0 / slope)
}
