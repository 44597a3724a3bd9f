//! Test-set evaluation: per-scene scores, medians with bootstrap
//! confidence intervals, direction maps and per-source-count tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamform::{apply_beamformer, max_di_weights, max_re_weights, max_sdr_weights, BeamWeights};
use crate::buffer::{AmbisonicsBuffer, MonoBuffer};
use crate::error::{Error, Result};
use crate::metrics::{si_sdr, ssr};
use crate::quadrature::{DirectionSet, DirectionSetKind};
use crate::scalar::Real;
use crate::sh::Direction;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// A rendered scene with its ground truth.
#[derive(Debug, Clone)]
pub struct LabeledMixture<T> {
    pub id: String,
    pub mixture: AmbisonicsBuffer<T>,
    /// Dry source signals; zero for inactive sources.
    pub truths: Vec<MonoBuffer<T>>,
    pub directions: Vec<Direction>,
    pub active: Vec<bool>,
}

impl<T: Real> LabeledMixture<T> {
    pub fn new(
        id: impl Into<String>,
        mixture: AmbisonicsBuffer<T>,
        truths: Vec<MonoBuffer<T>>,
        directions: Vec<Direction>,
        active: Vec<bool>,
    ) -> Result<Self> {
        let k = truths.len();
        if directions.len() != k || active.len() != k {
            return Err(Error::Shape(format!("{k} truths, {} directions, {} activity flags", directions.len(), active.len())));
        }
        if let Some(t) = truths.iter().find(|t| t.len() != mixture.len() || t.sample_rate() != mixture.sample_rate()) {
            return Err(Error::Shape(format!(
                "truth of {} samples @ {} Hz vs mixture of {} @ {}",
                t.len(),
                t.sample_rate(),
                mixture.len(),
                mixture.sample_rate()
            )));
        }
        Ok(Self { id: id.into(), mixture, truths, directions, active })
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn active_directions(&self) -> Vec<Direction> {
        self.directions.iter().zip(&self.active).filter(|(_, &a)| a).map(|(d, _)| *d).collect()
    }
}

/// A separation method under evaluation.
pub trait Method<T: Real>: Sync {
    fn name(&self) -> String;

    /// Estimate for an arbitrary target direction.
    fn predict(&self, scene: &LabeledMixture<T>, target: &Direction) -> Result<MonoBuffer<T>>;

    /// Estimate for source `k`; direction-steered by default.
    fn predict_source(&self, scene: &LabeledMixture<T>, k: usize) -> Result<MonoBuffer<T>> {
        self.predict(scene, &scene.directions[k])
    }

    /// Whether the method can be steered to source-free directions.
    fn steerable(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamKind {
    MaxDi,
    MaxRe,
}

impl BeamKind {
    pub fn weights<T: Real>(self, order: usize, target: &Direction) -> Result<BeamWeights<T>> {
        match self {
            BeamKind::MaxDi => max_di_weights(order, target),
            BeamKind::MaxRe => max_re_weights(order, target),
        }
    }
}

/// Signal-independent beamformer applied to the mixture truncated to `order`.
#[derive(Debug, Clone, Copy)]
pub struct BeamMethod {
    pub kind: BeamKind,
    pub order: usize,
}

impl<T: Real> Method<T> for BeamMethod {
    fn name(&self) -> String {
        match self.kind {
            BeamKind::MaxDi => "max-di".into(),
            BeamKind::MaxRe => "max-re".into(),
        }
    }

    fn predict(&self, scene: &LabeledMixture<T>, target: &Direction) -> Result<MonoBuffer<T>> {
        let mix = scene.mixture.truncated(self.order)?;
        apply_beamformer(&self.kind.weights(self.order, target)?, &mix)
    }
}

/// Oracle max-SDR beam; needs the ground truth, so it only predicts sources.
#[derive(Debug, Clone, Copy)]
pub struct MaxSdrOracle {
    pub order: usize,
    pub ridge: f64,
}

impl<T: Real> Method<T> for MaxSdrOracle {
    fn name(&self) -> String {
        "max-sdr".into()
    }

    fn predict(&self, _scene: &LabeledMixture<T>, _target: &Direction) -> Result<MonoBuffer<T>> {
        Err(Error::Domain("the max-sdr oracle cannot be steered to arbitrary directions".into()))
    }

    fn predict_source(&self, scene: &LabeledMixture<T>, k: usize) -> Result<MonoBuffer<T>> {
        let mix = scene.mixture.truncated(self.order)?;
        let w = max_sdr_weights(&mix, &scene.truths[k], self.ridge)?;
        apply_beamformer(&w.weights, &mix)
    }

    fn steerable(&self) -> bool {
        false
    }
}

/// Median of `values` (mean of the two central values for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile-bootstrap 95 % interval of the median.
pub fn bootstrap_median_ci(values: &[f64], resamples: usize, seed: u64) -> Option<(f64, f64)> {
    if values.is_empty() || resamples == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = vec![0.0; values.len()];
    let mut medians: Vec<f64> = (0..resamples)
        .map(|_| {
            for d in draw.iter_mut() {
                *d = values[rng.random_range(0..values.len())];
            }
            median(&draw).expect("nonempty")
        })
        .collect();
    medians.sort_by(f64::total_cmp);
    Some((percentile(&medians, 0.025), percentile(&medians, 0.975)))
}

/// Median with its bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Summary {
    pub fn of(values: &[f64], seed: u64) -> Option<Self> {
        let median = median(values)?;
        let (lo, hi) = bootstrap_median_ci(values, BOOTSTRAP_RESAMPLES, seed)?;
        Some(Self { median, ci_low: lo.min(median), ci_high: hi.max(median) })
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// SI-SDR of one (scene, active source) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub scene: usize,
    pub source: usize,
    pub active_sources: usize,
    pub si_sdr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub method: String,
    pub order: usize,
    pub si_sdr: Summary,
    pub ssr: Option<Summary>,
    pub pairs: Vec<PairScore>,
    pub scene_ssr: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Anechoic,
    Room,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub condition: Condition,
    pub seed: u64,
    pub scene_count: usize,
    pub rows: Vec<EvalRow>,
}

/// Scores `method` on every scene: SI-SDR at each active source direction
/// and, for steerable methods, one SSR value per scene.
pub fn evaluate_method<T: Real, M: Method<T> + ?Sized>(
    method: &M,
    order: usize,
    scenes: &[LabeledMixture<T>],
    seed: u64,
) -> Result<EvalRow> {
    if scenes.is_empty() {
        return Err(Error::Empty("no scenes".into()));
    }
    let per_scene: Vec<(Vec<PairScore>, Option<f64>)> = scenes
        .par_iter()
        .enumerate()
        .map(|(i, scene)| {
            let mut pairs = Vec::new();
            for k in (0..scene.truths.len()).filter(|&k| scene.active[k]) {
                let est = method.predict_source(scene, k)?;
                pairs.push(PairScore {
                    scene: i,
                    source: k,
                    active_sources: scene.active_count(),
                    si_sdr: si_sdr(&scene.truths[k], &est)?,
                });
            }
            let active = scene.active_directions();
            let s = if method.steerable() && !active.is_empty() { Some(ssr(|d| method.predict(scene, d), &active)?) } else { None };
            Ok((pairs, s))
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<PairScore> = per_scene.iter().flat_map(|(p, _)| p.iter().copied()).collect();
    let scene_ssr: Vec<f64> = per_scene.iter().filter_map(|(_, s)| *s).collect();
    let values: Vec<f64> = pairs.iter().map(|p| p.si_sdr).collect();
    let si = Summary::of(&values, seed).ok_or_else(|| Error::Empty("no active sources in any scene".into()))?;
    Ok(EvalRow { method: method.name(), order, si_sdr: si, ssr: Summary::of(&scene_ssr, seed.wrapping_add(1)), pairs, scene_ssr })
}

impl EvalReport {
    /// Rows of method × order with median and interval columns.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("method,order,si_sdr_median,si_sdr_ci_low,si_sdr_ci_high,ssr_median,ssr_ci_low,ssr_ci_high,pairs,scenes\n");
        for r in &self.rows {
            let ssr = r.ssr.map(|s| format!("{:.4},{:.4},{:.4}", s.median, s.ci_low, s.ci_high)).unwrap_or_else(|| ",,".into());
            let _ = writeln!(
                out,
                "{},{},{:.4},{:.4},{:.4},{},{},{}",
                r.method,
                r.order,
                r.si_sdr.median,
                r.si_sdr.ci_low,
                r.si_sdr.ci_high,
                ssr,
                r.pairs.len(),
                self.scene_count
            );
        }
        out
    }
}

/// Median SI-SDR per active-source count; `None` marks an empty stratum.
pub fn per_source_count_report(row: &EvalRow, counts: &[usize]) -> BTreeMap<usize, Option<f64>> {
    counts
        .iter()
        .map(|&c| {
            let v: Vec<f64> = row.pairs.iter().filter(|p| p.active_sources == c).map(|p| p.si_sdr).collect();
            (c, median(&v))
        })
        .collect()
}

/// CSV of [`per_source_count_report`] for several rows; empty strata print `-`.
pub fn per_source_count_csv(rows: &[EvalRow], counts: &[usize]) -> String {
    let mut out = String::from("method,order");
    for c in counts {
        let _ = write!(out, ",k{c}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", r.method, r.order);
        for v in per_source_count_report(r, counts).values() {
            match v {
                Some(x) => {
                    let _ = write!(out, ",{x:.4}");
                }
                None => out.push_str(",-"),
            }
        }
        out.push('\n');
    }
    out
}

/// Per-direction RMS level and, optionally, SI-SDR against each truth.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMap {
    pub grid: DirectionSet,
    pub rms_db: Vec<f64>,
    pub si_sdr: Vec<Vec<f64>>,
}

/// Level floor for silent outputs in the RMS map.
pub const RMS_FLOOR_DB: f64 = -200.0;

/// Evaluates `predict` on every grid direction.
pub fn direction_map<T, F>(predict: F, grid: &DirectionSet, truths: &[MonoBuffer<T>]) -> Result<DirectionMap>
where
    T: Real,
    F: Fn(&Direction) -> Result<MonoBuffer<T>> + Sync,
{
    let rows: Vec<(f64, Vec<f64>)> = grid
        .directions()
        .par_iter()
        .map(|d| {
            let est = predict(d)?;
            let rms = est.rms();
            let db = if rms > 0.0 { (20.0 * rms.log10()).max(RMS_FLOOR_DB) } else { RMS_FLOOR_DB };
            let s = truths.iter().map(|t| si_sdr(t, &est)).collect::<Result<Vec<_>>>()?;
            Ok((db, s))
        })
        .collect::<Result<_>>()?;
    let rms_db = rows.iter().map(|r| r.0).collect();
    let si_sdr = (0..truths.len()).map(|k| rows.iter().map(|r| r.1[k]).collect()).collect();
    Ok(DirectionMap { grid: grid.clone(), rms_db, si_sdr })
}

impl DirectionMap {
    /// `(rows, columns)` for an equiangular grid.
    pub fn dims(&self) -> Option<(usize, usize)> {
        match self.grid.kind() {
            DirectionSetKind::EquiangularGrid { n_az, n_zen } => Some((n_zen, n_az)),
            _ => None,
        }
    }

    /// `azimuth_deg,zenith_deg,rms_db[,si_sdr_k…]`, one line per grid direction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("azimuth_deg,zenith_deg,rms_db");
        for k in 0..self.si_sdr.len() {
            let _ = write!(out, ",si_sdr_{k}");
        }
        out.push('\n');
        for (i, d) in self.grid.iter().enumerate() {
            let _ = write!(out, "{:.4},{:.4},{:.4}", d.azimuth_deg(), d.zenith_deg(), self.rms_db[i]);
            for s in &self.si_sdr {
                let _ = write!(out, ",{:.4}", s[i]);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode_anechoic;
    use crate::quadrature::equiangular_grid;
    use crate::sh::great_circle;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, rng: &mut ChaCha8Rng) -> MonoBuffer<f64> {
        MonoBuffer::new((0..n).map(|_| StandardNormal.sample(rng)).collect(), 8000).unwrap()
    }

    fn scene(seed: u64, k: usize, len: usize) -> LabeledMixture<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dirs: Vec<Direction> =
            (0..k).map(|i| Direction::from_degrees(-150.0 + 100.0 * i as f64, 60.0 + 30.0 * i as f64).unwrap()).collect();
        let truths: Vec<_> = (0..k).map(|_| noise(len, &mut rng)).collect();
        let src: Vec<_> = truths.iter().cloned().zip(dirs.iter().copied()).collect();
        let mix = encode_anechoic(&src, 4).unwrap();
        LabeledMixture::new(format!("s{seed}"), mix, truths, dirs, vec![true; k]).unwrap()
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn bootstrap_is_deterministic_and_brackets_median() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut misses = 0;
        for trial in 0..200 {
            let n = rng.random_range(3..15);
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
            let a = bootstrap_median_ci(&v, 1000, trial).unwrap();
            assert_eq!(a, bootstrap_median_ci(&v, 1000, trial).unwrap());
            let m = median(&v).unwrap();
            if !(a.0 <= m && m <= a.1) {
                misses += 1;
            }
        }
        assert!(misses <= 2, "{misses}");
    }

    #[test]
    fn duplicating_scenes_keeps_median_and_shrinks_ci() {
        let scenes: Vec<_> = (0..6).map(|s| scene(s, 2, 800)).collect();
        let doubled: Vec<_> = scenes.iter().chain(scenes.iter()).cloned().collect();
        let m = BeamMethod { kind: BeamKind::MaxRe, order: 2 };
        let a = evaluate_method(&m, 2, &scenes, 3).unwrap();
        let b = evaluate_method(&m, 2, &doubled, 3).unwrap();
        assert!((a.si_sdr.median - b.si_sdr.median).abs() < 1e-12);
        assert!(b.si_sdr.half_width() <= a.si_sdr.half_width());
        assert_eq!(b.pairs.len(), 2 * a.pairs.len());
    }

    #[test]
    fn empty_scene_set_is_an_error() {
        let m = BeamMethod { kind: BeamKind::MaxDi, order: 1 };
        assert!(matches!(evaluate_method::<f64, _>(&m, 1, &[], 0), Err(Error::Empty(_))));
    }

    #[test]
    fn oracle_has_no_ssr() {
        let scenes = vec![scene(5, 3, 2000)];
        let row = evaluate_method(&MaxSdrOracle { order: 4, ridge: 0.0 }, 4, &scenes, 0).unwrap();
        assert!(row.ssr.is_none());
        assert!(row.si_sdr.median > 40.0);
    }

    #[test]
    fn inactive_sources_are_skipped() {
        let mut s = scene(6, 3, 500);
        s.active[1] = false;
        s.truths[1] = MonoBuffer::zeros(500, 8000);
        let row = evaluate_method(&BeamMethod { kind: BeamKind::MaxDi, order: 3 }, 3, &[s], 0).unwrap();
        assert_eq!(row.pairs.len(), 2);
        assert!(row.pairs.iter().all(|p| p.source != 1 && p.active_sources == 2));
    }

    #[test]
    fn strata_sum_and_gap_marker() {
        let scenes = vec![scene(7, 2, 400), scene(8, 3, 400), scene(9, 2, 400)];
        let row = evaluate_method(&BeamMethod { kind: BeamKind::MaxDi, order: 2 }, 2, &scenes, 0).unwrap();
        let rep = per_source_count_report(&row, &[2, 3, 4]);
        assert!(rep[&2].is_some() && rep[&3].is_some() && rep[&4].is_none());
        let n: usize = [2, 3, 4].iter().map(|&c| row.pairs.iter().filter(|p| p.active_sources == c).count()).sum();
        assert_eq!(n, row.pairs.len());
        let csv = per_source_count_csv(&[row], &[2, 3, 4]);
        assert!(csv.lines().nth(1).unwrap().ends_with(",-"));
    }

    #[test]
    fn omni_map_is_constant_and_max_di_peaks_at_source() {
        let grid = equiangular_grid(36, 18).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let src = Direction::from_degrees(47.0, 71.0).unwrap();
        let s = noise(400, &mut rng);
        let mix = encode_anechoic(&[(s.clone(), src)], 3).unwrap();
        let omni = direction_map(|_| MonoBuffer::new(mix.channel(0).to_vec(), 8000), &grid, &[]).unwrap();
        assert!(omni.rms_db.iter().all(|&v| (v - omni.rms_db[0]).abs() < 1e-12));
        assert_eq!(omni.dims(), Some((18, 36)));
        let m = BeamMethod { kind: BeamKind::MaxDi, order: 3 };
        let sc = LabeledMixture::new("x", mix, vec![s.clone()], vec![src], vec![true]).unwrap();
        let map = direction_map(|d| m.predict(&sc, d), &grid, &[s]).unwrap();
        let best = (0..grid.len()).max_by(|&a, &b| map.rms_db[a].total_cmp(&map.rms_db[b])).unwrap();
        let nearest = (0..grid.len())
            .min_by(|&a, &b| great_circle(&grid.directions()[a], &src).total_cmp(&great_circle(&grid.directions()[b], &src)))
            .unwrap();
        assert_eq!(best, nearest);
        assert_eq!(map.si_sdr.len(), 1);
        assert_eq!(map.to_csv().lines().count(), grid.len() + 1);
    }
}
