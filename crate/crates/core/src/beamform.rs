//! Spherical-harmonic beamformers and beam-pattern analysis.
//!
//! A beamformer is a real weight vector `d` over the ACN channels; its
//! output is `dᵀ χ(t)` and its pattern is `g(θ) = dᵀ y(θ)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buffer::{AmbisonicsBuffer, Convention, MonoBuffer};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, pseudo_solve};
use crate::quadrature::{equiangular_grid, quadrature_for_degree};
use crate::scalar::Real;
use crate::sh::{acn_to_nm, channel_count, great_circle, legendre, sh_eval, Direction};

/// Upper clamp for SDR-type measures, in dB.
pub const DB_CAP: f64 = 100.0;

/// Default relative ridge used when the covariance must be regularized.
pub const DEFAULT_RIDGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamLabel {
    MaxDi,
    MaxRe,
    MaxSdr,
    Custom,
}

/// Weight vector over `(N+1)²` ACN channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights<T> {
    order: usize,
    d: Vec<T>,
    label: BeamLabel,
    target: Option<Direction>,
}

impl<T: Real> BeamWeights<T> {
    pub fn custom(order: usize, d: Vec<T>) -> Result<Self> {
        if d.len() != channel_count(order) {
            return Err(Error::Shape(format!("order {order} needs {} weights, got {}", channel_count(order), d.len())));
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite beam weight".into()));
        }
        Ok(Self { order, d, label: BeamLabel::Custom, target: None })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> &[T] {
        &self.d
    }

    pub fn label(&self) -> BeamLabel {
        self.label
    }

    /// Steering direction, when the weights were designed for one.
    pub fn target(&self) -> Option<Direction> {
        self.target
    }

    pub fn scaled(&self, gain: T) -> Self {
        Self { d: self.d.iter().map(|&x| x * gain).collect(), ..self.clone() }
    }

    pub fn cast<U: Real>(&self) -> BeamWeights<U> {
        BeamWeights {
            order: self.order,
            d: self.d.iter().map(|&x| U::lit(x.to_f64_lossy())).collect(),
            label: self.label,
            target: self.target,
        }
    }
}

/// Plane-wave decomposition beam: `d = y_N(θ_t)`.
pub fn max_di_weights<T: Real>(order: usize, target: &Direction) -> Result<BeamWeights<T>> {
    let y = sh_eval::<T>(order, target)?;
    Ok(BeamWeights { order, d: y.into_coeffs(), label: BeamLabel::MaxDi, target: Some(*target) })
}

/// Per-order max-rE taper `w_n = P_n(cos(137.9° / (N + 1.51)))`.
pub fn max_re_order_weights(order: usize) -> Vec<f64> {
    let x = (137.9f64.to_radians() / (order as f64 + 1.51)).cos();
    (0..=order).map(|n| legendre(n, x)).collect()
}

/// Max-rE beam: `d = diag_N(w_n) y_N(θ_t)`.
pub fn max_re_weights<T: Real>(order: usize, target: &Direction) -> Result<BeamWeights<T>> {
    let w = max_re_order_weights(order);
    let y = sh_eval::<T>(order, target)?;
    let d = y.coeffs().iter().enumerate().map(|(c, &v)| v * T::lit(w[acn_to_nm(c).0])).collect();
    Ok(BeamWeights { order, d, label: BeamLabel::MaxRe, target: Some(*target) })
}

fn check_mix<T: Real>(order: usize, mix: &AmbisonicsBuffer<T>) -> Result<()> {
    if mix.convention() != Convention::Orthonormal {
        return Err(Error::Shape(format!("beamforming needs orthonormal channels, got {}", mix.convention())));
    }
    if mix.order() != order {
        return Err(Error::Shape(format!("weights of order {order} applied to a mixture of order {}", mix.order())));
    }
    Ok(())
}

/// `ŝ(t) = dᵀ χ(t)`.
pub fn apply_beamformer<T: Real>(w: &BeamWeights<T>, mix: &AmbisonicsBuffer<T>) -> Result<MonoBuffer<T>> {
    check_mix(w.order, mix)?;
    let mut out = vec![T::zero(); mix.len()];
    for (chan, &g) in mix.channels().iter().zip(&w.d) {
        if g == T::zero() {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(chan) {
            *o += g * x;
        }
    }
    MonoBuffer::new(out, mix.sample_rate())
}

/// Pattern value `g(θ) = dᵀ y_N(θ)`.
pub fn beam_pattern<T: Real>(w: &BeamWeights<T>, dir: &Direction) -> f64 {
    let y = crate::sh::sh_eval_raw::<f64>(w.order, dir);
    w.d.iter().zip(&y).map(|(a, b)| a.to_f64_lossy() * b).sum()
}

/// Direction of maximal `|g|`: the design target when known, otherwise a
/// grid search refined by a shrinking pattern search.
pub fn pattern_peak<T: Real>(w: &BeamWeights<T>) -> Direction {
    if let Some(t) = w.target {
        return t;
    }
    let grid = equiangular_grid(180, 90).expect("static grid");
    let (mut best, mut best_val) = (grid.directions()[0], f64::NEG_INFINITY);
    for d in grid.iter() {
        let v = beam_pattern(w, d).abs();
        if v > best_val {
            best = *d;
            best_val = v;
        }
    }
    let mut step = PI / 90.0;
    while step > 1e-10 {
        let mut improved = false;
        for (da, dz) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let zen = (best.zenith() + dz).clamp(0.0, PI);
            let cand = Direction::new(best.azimuth() + da, zen).expect("clamped zenith");
            let v = beam_pattern(w, &cand).abs();
            if v > best_val {
                best = cand;
                best_val = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// `10 log10(4π g²(θ_peak) / ∫ g²)`, integral by a t-design of degree ≥ 2N.
pub fn directivity_index<T: Real>(w: &BeamWeights<T>) -> Result<f64> {
    directivity_index_with_degree(w, 2 * w.order)
}

pub fn directivity_index_with_degree<T: Real>(w: &BeamWeights<T>, degree: usize) -> Result<f64> {
    let quad = quadrature_for_degree(degree.max(2 * w.order))?;
    let mean_power = quad.mean(|d| beam_pattern(w, d).powi(2));
    if !(mean_power > 0.0) {
        return Err(Error::ZeroEnergy("beam pattern".into()));
    }
    let peak = beam_pattern(w, &pattern_peak(w));
    // ∫ g² dθ = 4π · mean
    Ok(10.0 * (4.0 * PI * peak * peak / (4.0 * PI * mean_power)).log10())
}

/// Energy vector `r_E = ∫ g² θ / ∫ g²`, by a t-design of degree ≥ 2N+1.
pub fn re_vector<T: Real>(w: &BeamWeights<T>) -> Result<[f64; 3]> {
    re_vector_with_degree(w, 2 * w.order + 1)
}

pub fn re_vector_with_degree<T: Real>(w: &BeamWeights<T>, degree: usize) -> Result<[f64; 3]> {
    let quad = quadrature_for_degree(degree.max(2 * w.order + 1))?;
    let mut num = [0.0f64; 3];
    let mut den = 0.0f64;
    for d in quad.iter() {
        let g2 = beam_pattern(w, d).powi(2);
        let x = d.unit_vector();
        for k in 0..3 {
            num[k] += g2 * x[k];
        }
        den += g2;
    }
    if !(den > 0.0) {
        return Err(Error::ZeroEnergy("beam pattern".into()));
    }
    Ok([num[0] / den, num[1] / den, num[2] / den])
}

/// Angle from the peak to the first zero (or first local minimum of `|g|`)
/// of the pattern, scanned along a meridian.
pub fn main_lobe_radius<T: Real>(w: &BeamWeights<T>) -> f64 {
    let peak = pattern_peak(w);
    let x = peak.unit_vector();
    // unit vector orthogonal to the peak
    let helper = if x[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let dotp = x[0] * helper[0] + x[1] * helper[1] + x[2] * helper[2];
    let mut u = [helper[0] - dotp * x[0], helper[1] - dotp * x[1], helper[2] - dotp * x[2]];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|v| *v /= nu);
    let at = |gamma: f64| {
        let (s, c) = gamma.sin_cos();
        let v = [c * x[0] + s * u[0], c * x[1] + s * u[1], c * x[2] + s * u[2]];
        beam_pattern(w, &Direction::from_vector(v).expect("unit vector"))
    };
    let g0 = at(0.0);
    let step = 0.05f64.to_radians();
    let mut prev = g0.abs();
    let mut gamma = step;
    while gamma < PI {
        let g = at(gamma);
        if g.signum() != g0.signum() || g.abs() > prev {
            return gamma;
        }
        prev = g.abs();
        gamma += step;
    }
    PI
}

/// Highest side-lobe magnitude relative to the main-lobe peak, in dB, taken
/// over the given probe directions outside the main lobe.
pub fn side_lobe_level_db<T: Real>(w: &BeamWeights<T>, probes: &[Direction]) -> f64 {
    let peak = pattern_peak(w);
    let radius = main_lobe_radius(w);
    let peak_val = beam_pattern(w, &peak).abs();
    let side = probes.iter().filter(|d| great_circle(d, &peak) > radius).map(|d| beam_pattern(w, d).abs()).fold(0.0f64, f64::max);
    20.0 * (side / peak_val).log10()
}

/// How the max-SDR system was solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum SolveMethod {
    /// Cholesky on `C + ridge·tr(C)/M·I`.
    Cholesky { ridge: f64 },
    /// Minimum-norm least squares; `C` was numerically rank deficient.
    MinimumNorm { rank: usize },
}

#[derive(Debug, Clone)]
pub struct MaxSdrResult<T> {
    pub weights: BeamWeights<T>,
    pub solve: SolveMethod,
}

const COV_CHUNK: usize = 4096;

/// `C = Xᵀ X` and `Xᵀ s`, accumulated in fixed-size chunks in `f64`.
fn covariance<T: Real>(mix: &AmbisonicsBuffer<T>, reference: &[T]) -> (Vec<f64>, Vec<f64>) {
    let m = mix.channel_count();
    let len = mix.len();
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..len.div_ceil(COV_CHUNK))
        .into_par_iter()
        .map(|ci| {
            let (a, b) = (ci * COV_CHUNK, ((ci + 1) * COV_CHUNK).min(len));
            let mut c = vec![0.0; m * m];
            let mut r = vec![0.0; m];
            let cols: Vec<Vec<f64>> = mix.channels().iter().map(|ch| ch[a..b].iter().map(|x| x.to_f64_lossy()).collect()).collect();
            let s: Vec<f64> = reference[a..b].iter().map(|x| x.to_f64_lossy()).collect();
            for i in 0..m {
                r[i] = cols[i].iter().zip(&s).map(|(x, y)| x * y).sum();
                for j in i..m {
                    let v: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                    c[i * m + j] = v;
                    c[j * m + i] = v;
                }
            }
            (c, r)
        })
        .collect();
    let mut c = vec![0.0; m * m];
    let mut r = vec![0.0; m];
    for (cc, rr) in &chunks {
        c.iter_mut().zip(cc).for_each(|(a, b)| *a += b);
        r.iter_mut().zip(rr).for_each(|(a, b)| *a += b);
    }
    (c, r)
}

/// Oracle MMSE beam `d = (C + λ tr(C)/M · I)⁻¹ Xᵀ s` for a known reference.
///
/// With `ridge == 0` a rank-deficient covariance falls back to the
/// minimum-norm least-squares solution.
pub fn max_sdr_weights<T: Real>(mix: &AmbisonicsBuffer<T>, reference: &MonoBuffer<T>, ridge: f64) -> Result<MaxSdrResult<T>> {
    check_mix(mix.order(), mix)?;
    if reference.len() != mix.len() {
        return Err(Error::Shape(format!("reference has {} samples, mixture {}", reference.len(), mix.len())));
    }
    if !(ridge >= 0.0) {
        return Err(Error::Domain(format!("ridge must be non-negative, got {ridge}")));
    }
    let m = mix.channel_count();
    let (mut c, rhs) = covariance(mix, reference.samples());
    let trace: f64 = (0..m).map(|i| c[i * m + i]).sum();
    if !(trace > 0.0) {
        return Err(Error::ZeroEnergy("mixture".into()));
    }
    let (d, solve) = if ridge > 0.0 {
        let lambda = ridge * trace / m as f64;
        for i in 0..m {
            c[i * m + i] += lambda;
        }
        let l = cholesky(&c, m, 0.0).ok_or_else(|| Error::Domain("regularized covariance not positive definite".into()))?;
        (cholesky_solve(&l, m, &rhs), SolveMethod::Cholesky { ridge })
    } else if let Some(l) = cholesky(&c, m, 1e-12) {
        (cholesky_solve(&l, m, &rhs), SolveMethod::Cholesky { ridge: 0.0 })
    } else {
        let (x, rank) = pseudo_solve(&c, m, &rhs, 1e-12);
        (x, SolveMethod::MinimumNorm { rank })
    };
    let weights = BeamWeights { order: mix.order(), d: d.into_iter().map(T::lit).collect(), label: BeamLabel::MaxSdr, target: None };
    Ok(MaxSdrResult { weights, solve })
}

/// `10 log10(‖s‖² / ‖s − ŝ‖²)`, clamped to [`DB_CAP`]. Not scale invariant.
pub fn sdr<T: Real>(reference: &MonoBuffer<T>, estimate: &MonoBuffer<T>) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::Shape(format!("lengths differ: {} vs {}", reference.len(), estimate.len())));
    }
    let es = reference.energy();
    if !(es > 0.0) {
        return Err(Error::ZeroEnergy("reference".into()));
    }
    let err: f64 = reference.samples().iter().zip(estimate.samples()).map(|(a, b)| (a.to_f64_lossy() - b.to_f64_lossy()).powi(2)).sum();
    if err <= es * 10f64.powf(-DB_CAP / 10.0) {
        return Ok(DB_CAP);
    }
    Ok((10.0 * (es / err).log10()).min(DB_CAP))
}
