//! Area-uniform direction sampling with a minimum pairwise separation.

use ambisep_core::{great_circle, Direction, Error, Result};
use rand::Rng;

/// Total number of draws allowed before giving up.
pub const REJECTION_BUDGET: usize = 10_000;

/// Upper bound on `k` accepted by [`sample_directions`].
pub const MAX_DIRECTIONS: usize = 100;

/// One direction uniform on the sphere.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    let az = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let zen = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    Direction::new(az, zen).expect("zenith in range")
}

/// `k` uniform directions, each redrawn until it is at least `min_sep_deg`
/// away from all previously accepted ones.
pub fn sample_directions<R: Rng + ?Sized>(k: usize, min_sep_deg: f64, rng: &mut R) -> Result<Vec<Direction>> {
    if k == 0 || k > MAX_DIRECTIONS {
        return Err(Error::Domain(format!("direction count must be in 1..={MAX_DIRECTIONS}, got {k}")));
    }
    let sep = min_sep_deg.to_radians();
    let mut out: Vec<Direction> = Vec::with_capacity(k);
    let mut draws = 0;
    while out.len() < k {
        if draws == REJECTION_BUDGET {
            return Err(Error::Domain(format!("could not place {k} directions {min_sep_deg}° apart")));
        }
        draws += 1;
        let d = uniform_direction(rng);
        if out.iter().all(|o| great_circle(o, &d) >= sep) {
            out.push(d);
        }
    }
    Ok(out)
}

/// Smallest pairwise great-circle distance, in radians (`π` for fewer than two).
pub fn min_separation(dirs: &[Direction]) -> f64 {
    let mut best = std::f64::consts::PI;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            best = best.min(great_circle(&dirs[i], &dirs[j]));
        }
    }
    best
}
