//! Exact aggregation of a cell field onto a coarser level.

use super::cube::{level_cube_measure, space_ancestor, time_ancestor};
use super::field::CellField;
use super::window::{for_each_index, strides};

/// Integrals of a field over every level-`level` cube meeting the window.
pub(crate) struct Level {
    pub level: i32,
    k: u32,
    lo: Vec<i64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    d1: usize,
    /// `∫_{C ∩ W} g dμ` per cube and component.
    pub sums: Vec<f64>,
    /// `μ(C ∩ W)` per cube.
    pub inside: Vec<f64>,
    /// `μ(C)` indexed by the `i₁` offset.
    measure_x1: Vec<f64>,
    /// Cube of each base cell.
    pub base_to_anc: Vec<usize>,
}

fn ancestor_axis(axis: usize, i: i64, k: u32) -> i64 {
    if axis == 0 {
        time_ancestor(i, k)
    } else {
        space_ancestor(i, k)
    }
}

impl Level {
    /// Aggregates `transform(f)` onto level `level ≤ n_max`.
    pub fn build(f: &CellField, level: i32, transform: impl Fn(f64) -> f64) -> Level {
        let n_max = f.n_max();
        assert!(level <= n_max);
        let k = (n_max - level) as u32;
        let w = f.window();
        let axes = w.lo().len();
        let mut lo = Vec::with_capacity(axes);
        let mut shape = Vec::with_capacity(axes);
        let mut maps: Vec<Vec<usize>> = Vec::with_capacity(axes);
        for a in 0..axes {
            let l = ancestor_axis(a, w.lo()[a], k);
            let h = ancestor_axis(a, w.hi()[a] - 1, k);
            lo.push(l);
            shape.push((h - l + 1) as usize);
            maps.push((w.lo()[a]..w.hi()[a]).map(|i| (ancestor_axis(a, i, k) - l) as usize).collect());
        }
        let st = strides(&shape);
        let n_anc: usize = shape.iter().product();
        let d = axes - 1;
        let measure_x1 = (0..shape[1])
            .map(|j| level_cube_measure(level, lo[1] + j as i64, d, f.params()))
            .collect();
        let d1 = f.d1();
        let cell_m = f.x1_cell_measures();
        let mut sums = vec![0.0; n_anc * d1];
        let mut inside = vec![0.0; n_anc];
        let mut base_to_anc = vec![0usize; w.len()];
        let values = f.values();
        for_each_index(&w.shape(), |flat, idx| {
            let mut anc = 0;
            for a in 0..axes {
                anc += maps[a][idx[a]] * st[a];
            }
            base_to_anc[flat] = anc;
            let m = cell_m[idx[1]];
            inside[anc] += m;
            for c in 0..d1 {
                sums[anc * d1 + c] += m * transform(values[flat * d1 + c]);
            }
        });
        Level { level, k, lo, shape, strides: st, d1, sums, inside, measure_x1, base_to_anc }
    }

    pub fn n_cubes(&self) -> usize {
        self.inside.len()
    }

    /// `μ(C)` of cube `anc`.
    pub fn measure(&self, anc: usize) -> f64 {
        self.measure_x1[(anc / self.strides[1]) % self.shape[1]]
    }

    pub fn average(&self, anc: usize, comp: usize) -> f64 {
        self.sums[anc * self.d1 + comp] / self.measure(anc)
    }

    /// Cube containing an arbitrary base cell, if it meets the window.
    pub fn locate(&self, idx: &[i64]) -> Option<usize> {
        let mut anc = 0;
        for a in 0..self.lo.len() {
            let off = ancestor_axis(a, idx[a], self.k) - self.lo[a];
            if off < 0 || off as usize >= self.shape[a] {
                return None;
            }
            anc += off as usize * self.strides[a];
        }
        Some(anc)
    }

    /// Base-index bounds `(lo, hi)` of cube `anc`, half open.
    pub fn base_extent(&self, anc: usize) -> (Vec<i64>, Vec<i64>) {
        assert!(self.k <= 30, "cube too coarse to address in base indices");
        let axes = self.lo.len();
        let mut lo = vec![0; axes];
        let mut hi = vec![0; axes];
        let mut rem = anc;
        for a in 0..axes {
            let off = (rem / self.strides[a]) as i64;
            rem %= self.strides[a];
            let i = self.lo[a] + off;
            let scale: i64 = if a == 0 { 1i64 << (2 * self.k) } else { 1i64 << self.k };
            lo[a] = i * scale;
            hi[a] = (i + 1) * scale;
        }
        (lo, hi)
    }

    /// Whether coarser levels can no longer merge cubes of this window: each
    /// axis meets a single cube or the pair straddling zero.
    pub fn collapsed(&self) -> bool {
        (0..self.lo.len()).all(|a| self.shape[a] == 1 || (self.shape[a] == 2 && self.lo[a] == -1))
    }
}
