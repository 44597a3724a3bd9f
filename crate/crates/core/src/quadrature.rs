//! Direction sets on the sphere: embedded spherical t-designs and
//! equiangular grids.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sh::Direction;

const T_DESIGN_TABLE: &str = include_str!("../assets/t_designs.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSetKind {
    TDesign { t: usize },
    EquiangularGrid { n_az: usize, n_zen: usize },
    Custom,
}

/// Ordered, nonempty list of directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    directions: Vec<Direction>,
    kind: DirectionSetKind,
}

impl DirectionSet {
    pub fn custom(directions: Vec<Direction>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Empty("direction set".into()));
        }
        Ok(Self { directions, kind: DirectionSetKind::Custom })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn kind(&self) -> DirectionSetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Direction> {
        self.directions.iter()
    }

    /// Equal-weight mean of `f` over the set. For a t-design this is the
    /// exact spherical mean of every polynomial of degree ≤ t.
    pub fn mean<F: FnMut(&Direction) -> f64>(&self, mut f: F) -> f64 {
        self.directions.iter().map(&mut f).sum::<f64>() / self.directions.len() as f64
    }
}

fn designs() -> &'static BTreeMap<usize, Vec<[f64; 3]>> {
    static DESIGNS: OnceLock<BTreeMap<usize, Vec<[f64; 3]>>> = OnceLock::new();
    DESIGNS.get_or_init(|| {
        let mut out = BTreeMap::new();
        let mut current: Option<(usize, usize, Vec<[f64; 3]>)> = None;
        for line in T_DESIGN_TABLE.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("t ") {
                if let Some((t, n, pts)) = current.take() {
                    assert_eq!(pts.len(), n, "t-design table entry {t} truncated");
                    out.insert(t, pts);
                }
                let mut it = rest.split_whitespace().map(|v| v.parse::<usize>().unwrap());
                let (t, n) = (it.next().unwrap(), it.next().unwrap());
                current = Some((t, n, Vec::with_capacity(n)));
            } else {
                let mut it = line.split_whitespace().map(|v| v.parse::<f64>().unwrap());
                let p = [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()];
                current.as_mut().expect("point before header").2.push(p);
            }
        }
        if let Some((t, n, pts)) = current {
            assert_eq!(pts.len(), n);
            out.insert(t, pts);
        }
        out
    })
}

/// Degrees for which an embedded design exists.
pub fn available_t_designs() -> Vec<usize> {
    designs().keys().copied().collect()
}

/// Spherical t-design of degree `t` (Hardin–Sloane point sets; `t = 8` has 36 points).
pub fn t_design(t: usize) -> Result<DirectionSet> {
    let pts = designs().get(&t).ok_or(Error::UnsupportedDesign(t))?;
    let directions = pts.iter().map(|&p| Direction::from_vector(p)).collect::<Result<Vec<_>>>()?;
    Ok(DirectionSet { directions, kind: DirectionSetKind::TDesign { t } })
}

/// Smallest embedded design that integrates polynomials of degree `degree` exactly.
pub fn quadrature_for_degree(degree: usize) -> Result<DirectionSet> {
    let t = designs().keys().copied().find(|&t| t >= degree.max(1)).ok_or(Error::UnsupportedDesign(degree))?;
    t_design(t)
}

/// `n_az × n_zen` grid: azimuths `-π + 2πi/n_az`, zeniths at cell centres
/// `(j + ½)π/n_zen`. Zenith-major order (one row per zenith).
pub fn equiangular_grid(n_az: usize, n_zen: usize) -> Result<DirectionSet> {
    if n_az == 0 || n_zen == 0 {
        return Err(Error::Empty("equiangular grid needs n_az, n_zen >= 1".into()));
    }
    let mut directions = Vec::with_capacity(n_az * n_zen);
    for j in 0..n_zen {
        let zen = (j as f64 + 0.5) * PI / n_zen as f64;
        for i in 0..n_az {
            let az = -PI + 2.0 * PI * i as f64 / n_az as f64;
            directions.push(Direction::new(az, zen)?);
        }
    }
    Ok(DirectionSet { directions, kind: DirectionSetKind::EquiangularGrid { n_az, n_zen } })
}
