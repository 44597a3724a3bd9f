//! Room geometry and acoustics description.

use ambisep_core::{Direction, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bands::NUM_BANDS;

pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;

/// Minimum distance between any position and a wall, in meters.
pub const WALL_CLEARANCE: f64 = 0.1;

pub const DIM_RANGES: [(f64, f64); 3] = [(1.0, 5.0), (2.0, 6.0), (2.0, 4.0)];
pub const RT60_RANGE: (f64, f64) = (0.1, 0.5);

fn default_c() -> f64 {
    DEFAULT_SPEED_OF_SOUND
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSpec {
    /// `(Lx, Ly, Lz)` in meters.
    pub dims: [f64; 3],
    /// Reverberation time per octave band, 125 Hz to 8 kHz.
    pub rt60: [f64; NUM_BANDS],
    pub sources: Vec<[f64; 3]>,
    pub receiver: [f64; 3],
    pub sample_rate: u32,
    #[serde(default = "default_c")]
    pub speed_of_sound: f64,
}

impl RoomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| !(d.is_finite() && d > 2.0 * WALL_CLEARANCE)) {
            return Err(Error::Domain(format!("invalid room dimensions {:?}", self.dims)));
        }
        if self.rt60.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::Domain(format!("reverberation times must be positive, got {:?}", self.rt60)));
        }
        if self.sample_rate == 0 || !(self.speed_of_sound > 0.0) {
            return Err(Error::Domain("sample rate and speed of sound must be positive".into()));
        }
        if self.sources.is_empty() {
            return Err(Error::Empty("room has no sources".into()));
        }
        for p in self.sources.iter().chain(std::iter::once(&self.receiver)) {
            if !self.is_inside(p) {
                return Err(Error::Domain(format!("position {p:?} is not inside the room with {WALL_CLEARANCE} m clearance")));
            }
        }
        for (i, s) in self.sources.iter().enumerate() {
            if distance(s, &self.receiver) == 0.0 {
                return Err(Error::Domain(format!("source {i} coincides with the receiver")));
            }
        }
        Ok(())
    }

    fn is_inside(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|k| p[k] >= WALL_CLEARANCE && p[k] <= self.dims[k] - WALL_CLEARANCE)
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    pub fn surface(&self) -> f64 {
        let [x, y, z] = self.dims;
        2.0 * (x * y + x * z + y * z)
    }

    /// Mixing time `√V / 500` in seconds.
    pub fn mixing_time(&self) -> f64 {
        self.volume().sqrt() / 500.0
    }

    /// Direction of source `i` as seen from the receiver.
    pub fn source_direction(&self, i: usize) -> Result<Direction> {
        let s = self.sources.get(i).ok_or_else(|| Error::Domain(format!("no source {i}")))?;
        Direction::from_vector([s[0] - self.receiver[0], s[1] - self.receiver[1], s[2] - self.receiver[2]])
    }

    pub fn source_distance(&self, i: usize) -> f64 {
        distance(&self.sources[i], &self.receiver)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("room spec serializes")
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn position_inside(dims: &[f64; 3], rng: &mut ChaCha8Rng) -> [f64; 3] {
    std::array::from_fn(|k| rng.random_range(WALL_CLEARANCE..dims[k] - WALL_CLEARANCE))
}

/// Random room: dimensions and per-band reverberation times uniform in their
/// ranges, source and receiver positions uniform inside with wall clearance.
pub fn sample_room(seed: u64, n_sources: usize, sample_rate: u32) -> RoomSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_room_with(&mut rng, n_sources, sample_rate)
}

pub fn sample_room_with(rng: &mut ChaCha8Rng, n_sources: usize, sample_rate: u32) -> RoomSpec {
    let dims: [f64; 3] = std::array::from_fn(|k| rng.random_range(DIM_RANGES[k].0..=DIM_RANGES[k].1));
    let rt60: [f64; NUM_BANDS] = std::array::from_fn(|_| rng.random_range(RT60_RANGE.0..=RT60_RANGE.1));
    let receiver = position_inside(&dims, rng);
    let sources = (0..n_sources)
        .map(|_| loop {
            let p = position_inside(&dims, rng);
            if distance(&p, &receiver) > 0.0 {
                break p;
            }
        })
        .collect();
    RoomSpec { dims, rt60, sources, receiver, sample_rate, speed_of_sound: DEFAULT_SPEED_OF_SOUND }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_rooms_respect_ranges() {
        for seed in 0..10_000 {
            let r = sample_room(seed, 2, 16000);
            for (d, (lo, hi)) in r.dims.iter().zip(DIM_RANGES) {
                assert!((lo..=hi).contains(d));
            }
            assert!(r.rt60.iter().all(|&t| (RT60_RANGE.0..=RT60_RANGE.1).contains(&t)));
            let v = r.volume();
            assert!((4.0..=120.0).contains(&v));
            r.validate().unwrap();
        }
    }

    #[test]
    fn same_seed_same_room() {
        assert_eq!(sample_room(42, 3, 16000), sample_room(42, 3, 16000));
        assert_ne!(sample_room(42, 3, 16000), sample_room(43, 3, 16000));
    }

    #[test]
    fn mixing_time_example() {
        let mut r = sample_room(0, 1, 16000);
        r.dims = [3.0, 4.0, 3.0];
        assert!((r.mixing_time() - 0.012).abs() < 1e-15);
        assert!((r.surface() - 66.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let r = sample_room(7, 2, 16000);
        assert_eq!(RoomSpec::from_json(&r.to_json()).unwrap(), r);
        let mut bad = r.clone();
        bad.receiver = [0.0, 1.0, 1.0];
        assert!(RoomSpec::from_json(&bad.to_json()).is_err());
        assert!(RoomSpec::from_json(r#"{"dims":[1,2,3]}"#).is_err());
    }
}
