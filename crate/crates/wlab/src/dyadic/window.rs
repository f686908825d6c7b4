use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A half-open box of base-level cube indices.
///
/// Axis 0 is time, axes `1..=d` are space. `lo[1] ≥ 0` keeps every cell in the
/// closed half space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() < 2 {
            return Err(Error::Dimension(format!(
                "window bounds need matching lengths >= 2, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(Error::WindowMismatch(format!("empty window {lo:?}..{hi:?}")));
        }
        if lo[1] < 0 {
            return Err(Error::Domain(format!("first spatial index must be >= 0, got {}", lo[1])));
        }
        Ok(Self { lo, hi })
    }

    /// Spatial dimension `d`.
    pub fn d(&self) -> usize {
        self.lo.len() - 1
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn shape(&self) -> Vec<usize> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l) as usize).collect()
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, idx: &[i64]) -> bool {
        idx.len() == self.lo.len()
            && idx.iter().zip(self.lo.iter().zip(&self.hi)).all(|(i, (l, h))| l <= i && i < h)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo.len() == other.lo.len()
            && (0..self.lo.len()).all(|a| self.lo[a] <= other.lo[a] && other.hi[a] <= self.hi[a])
    }

    /// Smallest window containing both.
    pub fn hull(&self, other: &Window) -> Window {
        let lo = self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect();
        let hi = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect();
        Window { lo, hi }
    }

    /// Row-major position of a cell (time slowest).
    pub fn flat(&self, idx: &[i64]) -> Option<usize> {
        if !self.contains(idx) {
            return None;
        }
        let mut flat = 0usize;
        for a in 0..self.lo.len() {
            let extent = (self.hi[a] - self.lo[a]) as usize;
            flat = flat * extent + (idx[a] - self.lo[a]) as usize;
        }
        Some(flat)
    }

    /// Inverse of [`Window::flat`].
    pub fn multi(&self, mut flat: usize) -> Vec<i64> {
        let shape = self.shape();
        let mut idx = vec![0i64; shape.len()];
        for a in (0..shape.len()).rev() {
            idx[a] = self.lo[a] + (flat % shape[a]) as i64;
            flat /= shape[a];
        }
        idx
    }

    /// All cell indices in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |f| self.multi(f))
    }
}

/// Calls `visit(flat, idx)` for every cell of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut visit: impl FnMut(usize, &[usize])) {
    let total: usize = shape.iter().product();
    if total == 0 {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        visit(flat, &idx);
        for a in (0..shape.len()).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Row-major strides for `shape`.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip() {
        let w = Window::new(vec![-2, 0, -1], vec![1, 3, 2]).unwrap();
        assert_eq!(w.len(), 27);
        for (k, idx) in w.iter().enumerate() {
            assert_eq!(w.flat(&idx), Some(k));
        }
        assert_eq!(w.flat(&[1, 0, 0]), None);
    }

    #[test]
    fn rejects_negative_first_axis() {
        assert!(Window::new(vec![0, -1], vec![1, 1]).is_err());
        assert!(Window::new(vec![0, 0], vec![0, 1]).is_err());
    }

    #[test]
    fn odometer_matches_multi() {
        let w = Window::new(vec![0, 0, 0], vec![2, 3, 4]).unwrap();
        let shape = w.shape();
        for_each_index(&shape, |flat, idx| {
            let m = w.multi(flat);
            for a in 0..3 {
                assert_eq!(m[a] as usize, idx[a]);
            }
        });
        assert_eq!(strides(&shape), vec![12, 4, 1]);
    }
}
