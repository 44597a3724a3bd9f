//! Network inputs: direction scaling, per-mode track assembly and target
//! perturbation.

use std::f64::consts::PI;

use ambisep_core::beamform::{apply_beamformer, max_re_weights};
use ambisep_core::{AmbisonicsBuffer, Direction, Error, Real, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, ModelConfig};
use crate::ops::Tensor;

/// Target direction mapped to `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledDirection {
    pub azimuth: f64,
    pub zenith: f64,
}

impl ScaledDirection {
    pub fn as_array<T: Real>(self) -> [T; 2] {
        [T::lit(self.azimuth), T::lit(self.zenith)]
    }
}

/// `(φ/π, 2ϑ/π − 1)`.
pub fn scale_direction(dir: &Direction) -> ScaledDirection {
    ScaledDirection { azimuth: dir.azimuth() / PI, zenith: 2.0 * dir.zenith() / PI - 1.0 }
}

/// Assembled network input.
#[derive(Debug, Clone)]
pub struct NetInput<T> {
    pub tracks: Tensor<T>,
    pub condition: Option<ScaledDirection>,
    /// Divisor applied to the tracks; targets must be divided by it too.
    pub scale: f64,
    /// The standardization statistic was zero; the tracks are all zero.
    pub silent: bool,
}

fn std_dev<T: Real>(x: &[T]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n;
    (x.iter().map(|v| (v.to_f64_lossy() - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Builds the tracks for `mode`: the max-rE beam (refinement), all channels
/// (implicit) or the first-order channels plus the max-rE beam (mixed).
/// Tracks are divided by the standard deviation of the omni channel, or of
/// the beam in refinement mode.
pub fn assemble_input<T: Real>(cfg: &ModelConfig, mix: &AmbisonicsBuffer<T>, target: &Direction) -> Result<NetInput<T>> {
    if mix.order() != cfg.order {
        return Err(Error::Shape(format!("model expects order {}, mixture has order {}", cfg.order, mix.order())));
    }
    let beam = || -> Result<Vec<T>> { Ok(apply_beamformer(&max_re_weights(cfg.order, target)?, mix)?.into_samples()) };
    let rows: Vec<Vec<T>> = match cfg.mode {
        Mode::Refinement => vec![beam()?],
        Mode::Implicit => mix.channels().to_vec(),
        Mode::Mixed => {
            let mut r = mix.channels()[..4].to_vec();
            r.push(beam()?);
            r
        }
    };
    let stat = match cfg.mode {
        Mode::Refinement => std_dev(&rows[0]),
        _ => std_dev(mix.channel(0)),
    };
    let condition = cfg.mode.conditioned().then(|| scale_direction(target));
    let len = mix.len();
    let silent = !(stat > 0.0);
    let scale = if silent { 1.0 } else { stat };
    let inv = T::lit(1.0 / scale);
    let mut data = Vec::with_capacity(rows.len() * len);
    for r in &rows {
        if silent {
            data.extend(std::iter::repeat_n(T::zero(), len));
        } else {
            data.extend(r.iter().map(|&v| v * inv));
        }
    }
    Ok(NetInput { tracks: Tensor::from_data(rows.len(), len, data), condition, scale, silent })
}

/// Uniform draw from the spherical cap of angular radius `window_deg` around `dir`.
pub fn perturb_target<R: Rng + ?Sized>(dir: &Direction, window_deg: f64, rng: &mut R) -> Direction {
    if window_deg <= 0.0 {
        return *dir;
    }
    let cos_max = window_deg.to_radians().cos();
    // area-uniform: cos γ uniform in [cos γ_max, 1]
    let cos_g = 1.0 - rng.random::<f64>() * (1.0 - cos_max);
    let sin_g = (1.0 - cos_g * cos_g).max(0.0).sqrt();
    let psi = rng.random_range(0.0..2.0 * PI);
    let x = dir.unit_vector();
    let helper = if x[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let u = normalize(cross(helper, x));
    let v = cross(x, u);
    let p = std::array::from_fn(|k| cos_g * x[k] + sin_g * (psi.cos() * u[k] + psi.sin() * v[k]));
    Direction::from_vector(p).expect("unit vector")
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}
