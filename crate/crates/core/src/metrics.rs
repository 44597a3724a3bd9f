//! Scale-invariant SDR and the sources-to-silence ratio.

use crate::beamform::DB_CAP;
use crate::buffer::MonoBuffer;
use crate::error::{Error, Result};
use crate::quadrature::{t_design, DirectionSet};
use crate::scalar::Real;
use crate::sh::{great_circle, Direction};

/// Exclusion radius around each source for the silence term, in degrees.
pub const SSR_EXCLUSION_DEG: f64 = 2.5;

/// Degree of the default evaluation design (36 points).
pub const SSR_DESIGN_DEGREE: usize = 8;

/// `10 log10(‖αs‖² / ‖αs − ŝ‖²)` with `α = ŝᵀs / ‖s‖²`, clamped to ±100 dB.
pub fn si_sdr<T: Real>(reference: &MonoBuffer<T>, estimate: &MonoBuffer<T>) -> Result<f64> {
    si_sdr_slices(reference.samples(), estimate.samples())
}

pub fn si_sdr_slices<T: Real>(s: &[T], est: &[T]) -> Result<f64> {
    if s.len() != est.len() {
        return Err(Error::Shape(format!("lengths differ: {} vs {}", s.len(), est.len())));
    }
    let (mut ss, mut se, mut ee) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in s.iter().zip(est) {
        let (a, b) = (a.to_f64_lossy(), b.to_f64_lossy());
        ss += a * a;
        se += a * b;
        ee += b * b;
    }
    if !(ss > 0.0) {
        return Err(Error::ZeroEnergy("reference".into()));
    }
    if ee == 0.0 {
        return Ok(-DB_CAP);
    }
    let alpha = se / ss;
    let target = alpha * alpha * ss;
    // ‖αs − ŝ‖² computed directly; the expanded form cancels badly near 0
    let resid: f64 = s.iter().zip(est).map(|(a, b)| (alpha * a.to_f64_lossy() - b.to_f64_lossy()).powi(2)).sum();
    if resid <= target * 10f64.powf(-DB_CAP / 10.0) {
        return Ok(DB_CAP);
    }
    if target == 0.0 {
        return Ok(-DB_CAP);
    }
    Ok((10.0 * (target / resid).log10()).clamp(-DB_CAP, DB_CAP))
}

/// Evaluation directions that lie farther than `exclusion_deg` from every source.
pub fn silence_directions(eval_set: &DirectionSet, sources: &[Direction], exclusion_deg: f64) -> Vec<Direction> {
    let excl = exclusion_deg.to_radians();
    eval_set.iter().filter(|d| sources.iter().all(|s| great_circle(d, s) > excl)).copied().collect()
}

/// Mean accumulated relative to the first value, so that equal inputs
/// return that value exactly.
fn shifted_mean(v: &[f64]) -> f64 {
    let x0 = v[0];
    x0 + v.iter().map(|x| x - x0).sum::<f64>() / v.len() as f64
}

/// Sources-to-silence ratio from per-direction energies.
pub fn ssr_from_energies(source_energies: &[f64], silence_energies: &[f64]) -> Result<f64> {
    if source_energies.is_empty() {
        return Err(Error::Empty("source directions".into()));
    }
    if silence_energies.is_empty() {
        return Err(Error::Empty("every evaluation direction is within the exclusion radius".into()));
    }
    let num = shifted_mean(source_energies);
    let den = shifted_mean(silence_energies);
    if den < 1e-20 {
        return Ok(DB_CAP);
    }
    if num < 1e-20 {
        return Ok(-DB_CAP);
    }
    Ok((10.0 * (num / den).log10()).clamp(-DB_CAP, DB_CAP))
}

/// SSR of a direction-conditioned predictor over `eval_set`.
pub fn ssr_with<T, F>(mut predict: F, sources: &[Direction], eval_set: &DirectionSet, exclusion_deg: f64) -> Result<f64>
where
    T: Real,
    F: FnMut(&Direction) -> Result<MonoBuffer<T>>,
{
    if sources.is_empty() {
        return Err(Error::Empty("source directions".into()));
    }
    let silent = silence_directions(eval_set, sources, exclusion_deg);
    if silent.is_empty() {
        return Err(Error::Empty("every evaluation direction is within the exclusion radius".into()));
    }
    let src: Vec<f64> = sources.iter().map(|d| predict(d).map(|b| b.energy())).collect::<Result<_>>()?;
    let sil: Vec<f64> = silent.iter().map(|d| predict(d).map(|b| b.energy())).collect::<Result<_>>()?;
    ssr_from_energies(&src, &sil)
}

/// SSR over the 36-point design with a 2.5° exclusion radius.
pub fn ssr<T, F>(predict: F, sources: &[Direction]) -> Result<f64>
where
    T: Real,
    F: FnMut(&Direction) -> Result<MonoBuffer<T>>,
{
    ssr_with(predict, sources, &t_design(SSR_DESIGN_DEGREE)?, SSR_EXCLUSION_DEG)
}
