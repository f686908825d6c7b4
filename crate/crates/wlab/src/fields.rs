//! Node-sampled fields on uniform space-time grids.
//!
//! Values are stored time-major, then `x¹, …, x^d`, with the `d₁` components
//! fastest. A grid with `nt = 0` carries a single time node and stands for a
//! purely spatial field.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dyadic::{CellField, Window};
use crate::error::{Error, Result};
use crate::measure::WeightParams;

/// Uniform grid: `nt` time intervals on `[t0, t0 + t_len]` and `nx[k]`
/// intervals on `[x_lo[k], x_lo[k] + x_len[k]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub t_len: f64,
    pub nt: usize,
    pub x_lo: Vec<f64>,
    pub x_len: Vec<f64>,
    pub nx: Vec<usize>,
}

impl GridSpec {
    pub fn new(t0: f64, t_len: f64, nt: usize, x_lo: Vec<f64>, x_len: Vec<f64>, nx: Vec<usize>) -> Result<Self> {
        if x_lo.is_empty() || x_lo.len() != x_len.len() || x_lo.len() != nx.len() {
            return Err(Error::Dimension("grid axes disagree".into()));
        }
        if x_lo[0] < 0.0 {
            return Err(Error::Domain(format!("grid must lie in x1 >= 0, starts at {}", x_lo[0])));
        }
        if x_len.iter().any(|l| !(*l > 0.0)) || nx.iter().any(|n| *n == 0) {
            return Err(Error::Grid("every spatial axis needs positive length and intervals".into()));
        }
        if nt > 0 && !(t_len > 0.0) {
            return Err(Error::Grid("time axis needs positive length".into()));
        }
        Ok(Self { t0, t_len: if nt == 0 { 0.0 } else { t_len }, nt, x_lo, x_len, nx })
    }

    /// `[0, L₁] × ∏[−L_k, L_k]` over `[0, T]`.
    pub fn half_space(l1: f64, lprime: &[f64], n1: usize, nprime: &[usize], t_final: f64, nt: usize) -> Result<Self> {
        let mut x_lo = vec![0.0];
        let mut x_len = vec![l1];
        let mut nx = vec![n1];
        for (l, n) in lprime.iter().zip(nprime) {
            x_lo.push(-l);
            x_len.push(2.0 * l);
            nx.push(*n);
        }
        Self::new(0.0, t_final, nt, x_lo, x_len, nx)
    }

    /// Single-time grid.
    pub fn spatial(x_lo: Vec<f64>, x_len: Vec<f64>, nx: Vec<usize>) -> Result<Self> {
        Self::new(0.0, 0.0, 0, x_lo, x_len, nx)
    }

    pub fn d(&self) -> usize {
        self.x_lo.len()
    }

    pub fn h(&self, k: usize) -> f64 {
        self.x_len[k] / self.nx[k] as f64
    }

    pub fn ht(&self) -> f64 {
        if self.nt == 0 {
            0.0
        } else {
            self.t_len / self.nt as f64
        }
    }

    /// Node counts per axis, time first.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.nt + 1];
        s.extend(self.nx.iter().map(|n| n + 1));
        s
    }

    pub fn spatial_shape(&self) -> Vec<usize> {
        self.nx.iter().map(|n| n + 1).collect()
    }

    pub fn n_spatial_nodes(&self) -> usize {
        self.spatial_shape().iter().product()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.ht()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i == self.nx[axis] {
            self.x_lo[axis] + self.x_len[axis]
        } else {
            self.x_lo[axis] + i as f64 * self.h(axis)
        }
    }

    /// The spatial grid alone.
    pub fn spatial_part(&self) -> GridSpec {
        GridSpec { t0: 0.0, t_len: 0.0, nt: 0, ..self.clone() }
    }
}

/// A field sampled at the nodes of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    grid: GridSpec,
    d1: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    d: usize,
    d1: usize,
    steps: Vec<f64>,
    domain: GridSpec,
    #[serde(rename = "T")]
    t_final: f64,
}

impl NodeField {
    pub fn zeros(grid: GridSpec, d1: usize) -> Self {
        let n = grid.shape().iter().product::<usize>() * d1;
        Self { grid, d1, values: vec![0.0; n] }
    }

    pub fn from_values(grid: GridSpec, d1: usize, values: Vec<f64>) -> Result<Self> {
        let n = grid.shape().iter().product::<usize>() * d1;
        if values.len() != n || d1 == 0 {
            return Err(Error::Dimension(format!("expected {n} values, got {}", values.len())));
        }
        Ok(Self { grid, d1, values })
    }

    /// Evaluates `f(t, x)` at every node.
    pub fn sample(grid: GridSpec, d1: usize, f: impl Fn(f64, &[f64]) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.shape().iter().product::<usize>() * d1);
        let mut x = vec![0.0; grid.d()];
        let mut err = None;
        crate::dyadic::for_each_index(&grid.shape(), |_, idx| {
            let t = grid.time(idx[0]);
            for k in 0..x.len() {
                x[k] = grid.coord(k, idx[k + 1]);
            }
            let v = f(t, &x);
            if v.len() != d1 || v.iter().any(|y| !y.is_finite()) {
                err.get_or_insert(Error::Domain(format!("sampled function gave {v:?} at t = {t}, x = {x:?}")));
            }
            values.extend(v);
        });
        match err {
            Some(e) => Err(e),
            None => Self::from_values(grid, d1, values),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn n_times(&self) -> usize {
        self.grid.nt + 1
    }

    /// Values at time node `k` as a spatial field.
    pub fn time_slice(&self, k: usize) -> NodeField {
        let n = self.grid.n_spatial_nodes() * self.d1;
        let mut grid = self.grid.spatial_part();
        grid.t0 = self.grid.time(k);
        NodeField { grid, d1: self.d1, values: self.values[k * n..(k + 1) * n].to_vec() }
    }

    /// Stacks spatial fields on a uniform time axis.
    pub fn from_slices(slices: &[NodeField], t0: f64, t_len: f64) -> Result<NodeField> {
        let first = slices.first().ok_or_else(|| Error::Grid("no time slices".into()))?;
        let nt = slices.len() - 1;
        let mut grid = first.grid.spatial_part();
        grid.t0 = t0;
        grid.nt = nt;
        grid.t_len = if nt == 0 { 0.0 } else { t_len };
        let mut values = Vec::with_capacity(first.values.len() * slices.len());
        for s in slices {
            if s.grid.spatial_part() != first.grid.spatial_part() || s.d1 != first.d1 || s.grid.nt != 0 {
                return Err(Error::Grid("time slices live on different grids".into()));
            }
            values.extend_from_slice(&s.values);
        }
        Ok(NodeField { grid, d1: first.d1, values })
    }

    /// The field on the node index box `lo..=hi` (time first).
    pub fn subgrid(&self, lo: &[usize], hi: &[usize]) -> Result<NodeField> {
        let shape = self.grid.shape();
        if lo.len() != shape.len() || hi.len() != shape.len() || (0..shape.len()).any(|a| lo[a] > hi[a] || hi[a] >= shape[a]) {
            return Err(Error::Grid(format!("node box {lo:?}..={hi:?} outside shape {shape:?}")));
        }
        if (1..shape.len()).any(|a| lo[a] == hi[a]) {
            return Err(Error::Grid("sub-grid needs at least one interval per spatial axis".into()));
        }
        let g = &self.grid;
        let grid = GridSpec {
            t0: g.time(lo[0]),
            t_len: g.time(hi[0]) - g.time(lo[0]),
            nt: hi[0] - lo[0],
            x_lo: (0..g.d()).map(|k| g.coord(k, lo[k + 1])).collect(),
            x_len: (0..g.d()).map(|k| g.coord(k, hi[k + 1]) - g.coord(k, lo[k + 1])).collect(),
            nx: (0..g.d()).map(|k| hi[k + 1] - lo[k + 1]).collect(),
        };
        let mut full = shape.clone();
        full.push(self.d1);
        let strides = crate::dyadic::strides(&full);
        let sub: Vec<usize> = (0..shape.len()).map(|a| hi[a] - lo[a] + 1).collect();
        let mut values = Vec::with_capacity(sub.iter().product::<usize>() * self.d1);
        crate::dyadic::for_each_index(&sub, |_, idx| {
            let base: usize = (0..idx.len()).map(|a| (lo[a] + idx[a]) * strides[a]).sum();
            values.extend_from_slice(&self.values[base..base + self.d1]);
        });
        Ok(NodeField { grid, d1: self.d1, values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> NodeField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn scale(&self, c: f64) -> NodeField {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &NodeField, f: impl Fn(f64, f64) -> f64) -> Result<NodeField> {
        if self.grid != other.grid || self.d1 != other.d1 {
            return Err(Error::Grid("fields live on different grids".into()));
        }
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a = f(*a, *b));
        Ok(out)
    }

    /// Multiplies every node value by `g(t, x)`.
    pub fn multiply_by(&self, g: impl Fn(f64, &[f64]) -> f64) -> NodeField {
        let mut out = self.clone();
        let d1 = self.d1;
        let mut x = vec![0.0; self.d()];
        crate::dyadic::for_each_index(&self.grid.shape(), |flat, idx| {
            for k in 0..x.len() {
                x[k] = self.grid.coord(k, idx[k + 1]);
            }
            let m = g(self.grid.time(idx[0]), &x);
            for c in 0..d1 {
                out.values[flat * d1 + c] *= m;
            }
        });
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|value|` on nodes within `margin` of `x¹ = 0` or of an outer
    /// spatial face.
    pub fn margin_max(&self, margin: f64) -> f64 {
        let mut m: f64 = 0.0;
        let g = &self.grid;
        crate::dyadic::for_each_index(&g.shape(), |flat, idx| {
            let near = (0..g.d()).any(|k| {
                let x = g.coord(k, idx[k + 1]);
                x - g.x_lo[k] < margin || g.x_lo[k] + g.x_len[k] - x < margin
            });
            if near {
                for c in 0..self.d1 {
                    m = m.max(self.values[flat * self.d1 + c].abs());
                }
            }
        });
        m
    }

    /// Finite-difference `∂_t^{time_order} D^β u`.
    ///
    /// Second-order central stencils inside, second-order one-sided stencils
    /// on faces; third and fourth derivatives compose first and second ones.
    pub fn derivative(&self, beta: &[usize], time_order: usize) -> Result<NodeField> {
        if beta.len() != self.d() {
            return Err(Error::Dimension(format!("multi-index of length {} in dimension {}", beta.len(), self.d())));
        }
        let total: usize = beta.iter().sum();
        if total > 4 || time_order > 1 {
            return Err(Error::Grid(format!("derivative order |beta| = {total}, time order {time_order} not supported")));
        }
        let mut out = self.clone();
        if time_order == 1 {
            out = out.axis_derivative(0, 1)?;
        }
        for (k, &m) in beta.iter().enumerate() {
            let mut left = m;
            while left > 0 {
                let step = if left >= 2 { 2 } else { 1 };
                out = out.axis_derivative(k + 1, step)?;
                left -= step;
            }
        }
        Ok(out)
    }

    /// First or second derivative along one axis (0 = time).
    fn axis_derivative(&self, axis: usize, order: usize) -> Result<NodeField> {
        let shape = self.grid.shape();
        let n = shape[axis];
        if n < order + 2 {
            return Err(Error::Grid(format!("axis {axis} has {n} nodes, too few for order {order}")));
        }
        let h = if axis == 0 { self.grid.ht() } else { self.grid.h(axis - 1) };
        let mut full = shape.clone();
        full.push(self.d1);
        let strides = crate::dyadic::strides(&full);
        let st = strides[axis];
        let mut out = vec![0.0; self.values.len()];
        let v = &self.values;
        for flat in 0..v.len() {
            let i = (flat / st) % n;
            let at = |j: usize| v[flat - i * st + j * st];
            out[flat] = if order == 1 {
                if i == 0 {
                    (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
                } else {
                    (at(i + 1) - at(i - 1)) / (2.0 * h)
                }
            } else if i == 0 {
                (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h)
            } else if i == n - 1 {
                (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) / (h * h)
            } else {
                (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h)
            };
        }
        Ok(NodeField { grid: self.grid.clone(), d1: self.d1, values: out })
    }

    /// `u^c(t, x) = u(c²t, cx)` on the rescaled grid, with identical node values.
    pub fn dilate(&self, c: f64) -> Result<NodeField> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("dilation needs c > 0, got {c}")));
        }
        let g = &self.grid;
        let grid = GridSpec {
            t0: g.t0 / (c * c),
            t_len: g.t_len / (c * c),
            nt: g.nt,
            x_lo: g.x_lo.iter().map(|v| v / c).collect(),
            x_len: g.x_len.iter().map(|v| v / c).collect(),
            nx: g.nx.clone(),
        };
        Ok(NodeField { grid, d1: self.d1, values: self.values.clone() })
    }

    /// Cell field at resolution `n_max` whose values are the arithmetic means
    /// of the nodes on each closed dyadic cell.
    pub fn to_cellfield(&self, n_max: i32, params: WeightParams) -> Result<CellField> {
        let g = &self.grid;
        if g.nt == 0 {
            return Err(Error::Grid("cell fields need a time axis".into()));
        }
        let s = 2f64.powi(-n_max);
        let axes = g.d() + 1;
        let mut lo = Vec::with_capacity(axes);
        let mut hi = Vec::with_capacity(axes);
        let mut per_cell = Vec::with_capacity(axes);
        for a in 0..axes {
            let (origin, len, count, side) = if a == 0 {
                (g.t0, g.t_len, g.nt, s * s)
            } else {
                (g.x_lo[a - 1], g.x_len[a - 1], g.nx[a - 1], s)
            };
            let whole = |v: f64| -> Result<i64> {
                let r = v.round();
                if (v - r).abs() > 1e-9 * v.abs().max(1.0) {
                    Err(Error::Grid(format!("axis {a} is not commensurate with level {n_max}")))
                } else {
                    Ok(r as i64)
                }
            };
            let first = whole(origin / side)?;
            let cells = whole(len / side)?;
            let nodes_per_cell = whole(count as f64 / cells as f64)?;
            if cells <= 0 || nodes_per_cell as usize * cells as usize != count {
                return Err(Error::Grid(format!("axis {a} is not commensurate with level {n_max}")));
            }
            lo.push(first);
            hi.push(first + cells);
            per_cell.push(nodes_per_cell as usize);
        }
        let window = Window::new(lo, hi)?;
        let d1 = self.d1;
        let mut full = g.shape();
        full.push(d1);
        let strides = crate::dyadic::strides(&full);
        let block: Vec<usize> = per_cell.iter().map(|k| k + 1).collect();
        let count: usize = block.iter().product();
        let mut values = vec![0.0; window.len() * d1];
        crate::dyadic::for_each_index(&window.shape(), |cell, cidx| {
            crate::dyadic::for_each_index(&block, |_, off| {
                let mut base = 0;
                for a in 0..axes {
                    base += (cidx[a] * per_cell[a] + off[a]) * strides[a];
                }
                for c in 0..d1 {
                    values[cell * d1 + c] += self.values[base + c];
                }
            });
        });
        values.iter_mut().for_each(|v| *v /= count as f64);
        CellField::from_values(d1, params, n_max, window, values)
    }

    /// JSON header line, then one CSV row `t, x¹, …, x^d, v¹, …` per node.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let g = &self.grid;
        let mut steps = vec![g.ht()];
        steps.extend((0..g.d()).map(|k| g.h(k)));
        let header = Header { d: g.d(), d1: self.d1, steps, domain: g.clone(), t_final: g.t0 + g.t_len };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let mut row = Vec::with_capacity(1 + g.d() + self.d1);
        let mut err = None;
        crate::dyadic::for_each_index(&g.shape(), |flat, idx| {
            row.clear();
            row.push(format!("{:?}", g.time(idx[0])));
            for k in 0..g.d() {
                row.push(format!("{:?}", g.coord(k, idx[k + 1])));
            }
            for c in 0..self.d1 {
                row.push(format!("{:?}", self.values[flat * self.d1 + c]));
            }
            if let Err(e) = wtr.write_record(&row) {
                err.get_or_insert(e);
            }
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<NodeField> {
        let mut line = String::new();
        input.read_line(&mut line)?;
        let header: Header = serde_json::from_str(line.trim())?;
        let grid = header.domain;
        let width = 1 + grid.d() + header.d1;
        let mut values = Vec::new();
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != width {
                return Err(Error::Parse(format!("row has {} fields, expected {width}", rec.len())));
            }
            for a in 1 + grid.d()..width {
                values.push(rec[a].trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
            }
        }
        NodeField::from_values(grid, header.d1, values)
    }
}
