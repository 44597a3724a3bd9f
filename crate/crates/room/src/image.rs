//! Image-source enumeration on the shoebox mirror lattice.

use ambisep_core::{Direction, Error, Result};

use crate::bands::NUM_BANDS;
use crate::spec::{distance, RoomSpec};

/// Highest reflection order used by the simulator.
pub const MAX_IMAGE_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSource {
    /// Lattice index per axis; `|i|` is the number of bounces on that axis.
    pub lattice: [i32; 3],
    pub position: [f64; 3],
    /// Arrival direction at the receiver.
    pub direction: Direction,
    pub distance: f64,
    /// `β_b^order`; spherical spreading `1/distance` is applied at render time.
    pub band_gains: [f64; NUM_BANDS],
    pub reflection_order: usize,
}

impl ImageSource {
    /// Pressure amplitude in band `b` including spherical spreading.
    pub fn amplitude(&self, b: usize) -> f64 {
        self.band_gains[b] / self.distance
    }
}

/// Amplitude reflection coefficient `exp(-0.0815 V / (S T))`, i.e.
/// `√(1 − ᾱ)` with Eyring absorption `ᾱ = 1 − exp(−0.163 V / (S T))`.
pub fn eyring_reflection(volume: f64, surface: f64, rt60: f64) -> Result<f64> {
    if !(volume > 0.0 && surface > 0.0 && rt60 > 0.0) {
        return Err(Error::Domain(format!("Eyring needs positive V, S, T (got {volume}, {surface}, {rt60})")));
    }
    Ok((-0.0815 * volume / (surface * rt60)).exp())
}

/// Per-band reflection coefficients of a room.
pub fn band_reflections(room: &RoomSpec) -> Result<[f64; NUM_BANDS]> {
    let (v, s) = (room.volume(), room.surface());
    let mut out = [0.0; NUM_BANDS];
    for (o, &t) in out.iter_mut().zip(&room.rt60) {
        *o = eyring_reflection(v, s, t)?;
    }
    Ok(out)
}

/// Coordinate of lattice image `i` along one axis of length `l`.
fn image_coordinate(i: i32, l: f64, s: f64) -> f64 {
    let base = i as f64 * l;
    if i.rem_euclid(2) == 0 {
        base + s
    } else {
        base + (l - s)
    }
}

/// All images with at most `max_order` wall bounces, ordered by reflection
/// order and then lattice index. The first entry is the direct path.
pub fn image_sources(room: &RoomSpec, src: usize, max_order: usize) -> Result<Vec<ImageSource>> {
    room.validate()?;
    let s = *room.sources.get(src).ok_or_else(|| Error::Domain(format!("no source {src}")))?;
    let beta = band_reflections(room)?;
    let r = room.receiver;
    let m = max_order as i32;
    let mut out = Vec::new();
    for order in 0..=max_order {
        for i in -m..=m {
            for j in -m..=m {
                for k in -m..=m {
                    if (i.abs() + j.abs() + k.abs()) as usize != order {
                        continue;
                    }
                    let position = [
                        image_coordinate(i, room.dims[0], s[0]),
                        image_coordinate(j, room.dims[1], s[1]),
                        image_coordinate(k, room.dims[2], s[2]),
                    ];
                    let d = distance(&position, &r);
                    let direction = Direction::from_vector([position[0] - r[0], position[1] - r[1], position[2] - r[2]])?;
                    let band_gains = std::array::from_fn(|b| beta[b].powi(order as i32));
                    out.push(ImageSource { lattice: [i, j, k], position, direction, distance: d, band_gains, reflection_order: order });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::sample_room;

    #[test]
    fn eyring_examples() {
        let beta = eyring_reflection(36.0, 66.0, 0.3).unwrap();
        let alpha = 1.0 - (-0.163f64 * 36.0 / (66.0 * 0.3)).exp();
        assert!((alpha - 0.2565).abs() < 1e-4);
        assert!((beta - 0.8623).abs() < 1e-4);
        assert!((beta - (1.0 - alpha).sqrt()).abs() < 1e-12);
        assert!(eyring_reflection(36.0, 66.0, 1e9).unwrap() > 1.0 - 1e-9);
        assert!(eyring_reflection(36.0, 66.0, 0.2).unwrap() < beta);
        assert!(eyring_reflection(0.0, 66.0, 0.3).is_err());
        assert!(eyring_reflection(36.0, 66.0, -1.0).is_err());
    }

    #[test]
    fn counts_follow_the_octahedral_numbers() {
        let room = sample_room(3, 1, 16000);
        for (order, count) in [(0, 1), (1, 7), (2, 25), (3, 63), (6, 377)] {
            assert_eq!(image_sources(&room, 0, order).unwrap().len(), count);
        }
    }

    #[test]
    fn direct_path_first() {
        let room = sample_room(4, 2, 16000);
        let imgs = image_sources(&room, 1, 2).unwrap();
        assert_eq!(imgs[0].reflection_order, 0);
        assert_eq!(imgs[0].band_gains, [1.0; NUM_BANDS]);
        assert!((imgs[0].distance - room.source_distance(1)).abs() < 1e-12);
        assert!(imgs.iter().all(|im| im.distance >= imgs[0].distance - 1e-12));
        assert!(imgs.iter().all(|im| im.band_gains.iter().all(|&g| g > 0.0 && g <= 1.0)));
        assert!(image_sources(&room, 5, 1).is_err());
    }

    #[test]
    fn first_order_images_mirror_the_walls() {
        let room = sample_room(5, 1, 16000);
        let s = room.sources[0];
        let imgs = image_sources(&room, 0, 1).unwrap();
        let x: Vec<f64> = imgs.iter().filter(|im| im.lattice[1] == 0 && im.lattice[2] == 0).map(|im| im.position[0]).collect();
        assert!(x.iter().any(|&v| (v + s[0]).abs() < 1e-12));
        assert!(x.iter().any(|&v| (v - (2.0 * room.dims[0] - s[0])).abs() < 1e-12));
    }
}
