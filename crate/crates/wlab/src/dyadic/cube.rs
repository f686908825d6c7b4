use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{weight_between, WeightParams};

/// Floor of `i / 4^k`.
pub(crate) fn time_ancestor(i0: i64, k: u32) -> i64 {
    let s = 2 * k;
    if s >= 63 {
        if i0 < 0 {
            -1
        } else {
            0
        }
    } else {
        i0 >> s
    }
}

/// Floor of `i / 2^k`.
pub(crate) fn space_ancestor(i: i64, k: u32) -> i64 {
    if k >= 63 {
        if i < 0 {
            -1
        } else {
            0
        }
    } else {
        i >> k
    }
}

/// `2^{-n}` as a float.
pub(crate) fn side(level: i32) -> f64 {
    2f64.powi(-level)
}

/// μ-mass of the level-`level` cube with first spatial index `i1`.
pub(crate) fn level_cube_measure(level: i32, i1: i64, d: usize, params: WeightParams) -> f64 {
    let s = side(level);
    let time = s * s;
    let transverse = s.powi(d as i32 - 1);
    time * transverse * weight_between(i1 as f64 * s, (i1 + 1) as f64 * s, params)
}

/// A member of the space-time filtration: time side `4^{-n}`, spatial side `2^{-n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParabolicCube {
    pub level: i32,
    pub i0: i64,
    pub i: Vec<i64>,
}

/// A member of the spatial filtration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpatialCell {
    pub level: i32,
    pub i: Vec<i64>,
}

impl SpatialCell {
    pub fn new(level: i32, i: Vec<i64>) -> Result<Self> {
        check_space_index(&i)?;
        Ok(Self { level, i })
    }

    pub fn parent(&self) -> SpatialCell {
        SpatialCell { level: self.level - 1, i: self.i.iter().map(|&v| space_ancestor(v, 1)).collect() }
    }

    /// ν-mass.
    pub fn measure(&self, params: WeightParams) -> f64 {
        let s = side(self.level);
        s.powi(self.i.len() as i32 - 1) * weight_between(self.i[0] as f64 * s, (self.i[0] + 1) as f64 * s, params)
    }
}

fn check_space_index(i: &[i64]) -> Result<()> {
    if i.is_empty() {
        return Err(Error::Dimension("cube needs at least one spatial index".into()));
    }
    if i[0] < 0 {
        return Err(Error::Domain(format!("first spatial index must be >= 0, got {}", i[0])));
    }
    Ok(())
}

impl ParabolicCube {
    pub fn new(level: i32, i0: i64, i: Vec<i64>) -> Result<Self> {
        check_space_index(&i)?;
        Ok(Self { level, i0, i })
    }

    pub fn d(&self) -> usize {
        self.i.len()
    }

    /// `[i0/4ⁿ, (i0+1)/4ⁿ)`.
    pub fn time_extent(&self) -> (f64, f64) {
        let s = side(self.level);
        let t = s * s;
        (self.i0 as f64 * t, (self.i0 + 1) as f64 * t)
    }

    /// `[i_k/2ⁿ, (i_k+1)/2ⁿ)` for spatial axis `k` (0-based).
    pub fn space_extent(&self, k: usize) -> (f64, f64) {
        let s = side(self.level);
        (self.i[k] as f64 * s, (self.i[k] + 1) as f64 * s)
    }

    /// The unique level `n − 1` cube containing this one.
    pub fn parent(&self) -> ParabolicCube {
        self.ancestor(self.level - 1)
    }

    /// The level-`level` cube containing this one (`level ≤ self.level`).
    pub fn ancestor(&self, level: i32) -> ParabolicCube {
        assert!(level <= self.level, "ancestor level must not be finer");
        let k = (self.level - level) as u32;
        ParabolicCube {
            level,
            i0: time_ancestor(self.i0, k),
            i: self.i.iter().map(|&v| space_ancestor(v, k)).collect(),
        }
    }

    /// Whether `other` is contained in `self`.
    pub fn contains_cube(&self, other: &ParabolicCube) -> bool {
        other.level >= self.level && other.d() == self.d() && other.ancestor(self.level) == *self
    }

    /// Euclidean diameter of the cube in `(t, x)`.
    pub fn diameter(&self) -> f64 {
        let s = side(self.level);
        (s.powi(4) + self.d() as f64 * s * s).sqrt()
    }
}

/// The level-`n` cube containing `(t, x)`.
pub fn locate_cube(n: i32, t: f64, x: &[f64]) -> Result<ParabolicCube> {
    if x.is_empty() {
        return Err(Error::Dimension("point needs at least one coordinate".into()));
    }
    if !(x[0] >= 0.0) {
        return Err(Error::Domain(format!("x1 must be >= 0, got {}", x[0])));
    }
    let scale = side(-n);
    let i0 = (t * scale * scale).floor() as i64;
    let i = x.iter().map(|&v| (v * scale).floor() as i64).collect();
    Ok(ParabolicCube { level: n, i0, i })
}

pub fn parent(c: &ParabolicCube) -> ParabolicCube {
    c.parent()
}

/// Exact μ-mass of a cube.
pub fn cube_measure(c: &ParabolicCube, params: WeightParams) -> f64 {
    level_cube_measure(c.level, c.i[0], c.d(), params)
}

/// `μ(parent(c)) / μ(c)`.
pub fn parent_ratio(c: &ParabolicCube, params: WeightParams) -> f64 {
    cube_measure(&c.parent(), params) / cube_measure(c, params)
}

/// Certified upper bound on [`parent_ratio`] over all cubes in dimension `d`.
///
/// For `α ≥ 0` this is `2^{α+d+2}`, attained at cubes touching `x¹ = 0`. For
/// `α < 0` the `x¹` factor is at most `max(2, 2^{α+1}/(2^{α+1}−1), 2^{1−α})`.
pub fn parent_ratio_bound(d: usize, params: WeightParams) -> f64 {
    let alpha = params.alpha();
    let lift = 2f64.powi(d as i32 + 1);
    if alpha >= 0.0 {
        lift * 2f64.powf(alpha + 1.0)
    } else {
        let e = 2f64.powf(alpha + 1.0);
        lift * 2f64.max(e / (e - 1.0)).max(2f64.powf(1.0 - alpha))
    }
}
