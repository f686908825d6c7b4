use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::cube::{level_cube_measure, ParabolicCube};
use super::window::Window;
use crate::error::{Error, Result};
use crate::measure::WeightParams;

/// A piecewise-constant `ℝ^{d₁}`-valued field on the level-`n_max` cubes of a
/// window, zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    d1: usize,
    params: WeightParams,
    n_max: i32,
    window: Window,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    d: usize,
    d1: usize,
    alpha: f64,
    n_max: i32,
    window: Window,
}

impl CellField {
    pub fn zeros(d1: usize, params: WeightParams, n_max: i32, window: Window) -> Result<Self> {
        if d1 == 0 {
            return Err(Error::Dimension("d1 must be positive".into()));
        }
        let values = vec![0.0; window.len() * d1];
        Ok(Self { d1, params, n_max, window, values })
    }

    /// Values in row-major cell order, component fastest.
    pub fn from_values(
        d1: usize,
        params: WeightParams,
        n_max: i32,
        window: Window,
        values: Vec<f64>,
    ) -> Result<Self> {
        if d1 == 0 || values.len() != window.len() * d1 {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                window.len() * d1,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("cell values must be finite".into()));
        }
        Ok(Self { d1, params, n_max, window, values })
    }

    /// Fills cell `idx` with `f(idx)`.
    pub fn from_fn(
        d1: usize,
        params: WeightParams,
        n_max: i32,
        window: Window,
        mut f: impl FnMut(&[i64]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(window.len() * d1);
        for idx in window.iter() {
            let v = f(&idx);
            if v.len() != d1 {
                return Err(Error::Dimension(format!("value of length {} for d1 = {d1}", v.len())));
            }
            values.extend(v);
        }
        Self::from_values(d1, params, n_max, window, values)
    }

    pub fn d(&self) -> usize {
        self.window.d()
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn params(&self) -> WeightParams {
        self.params
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value vector at a cell; zeros outside the window.
    pub fn get(&self, idx: &[i64]) -> Vec<f64> {
        match self.window.flat(idx) {
            Some(f) => self.values[f * self.d1..(f + 1) * self.d1].to_vec(),
            None => vec![0.0; self.d1],
        }
    }

    pub fn set(&mut self, idx: &[i64], v: &[f64]) -> Result<()> {
        let f = self
            .window
            .flat(idx)
            .ok_or_else(|| Error::WindowMismatch(format!("cell {idx:?} outside window")))?;
        if v.len() != self.d1 {
            return Err(Error::Dimension(format!("value of length {} for d1 = {}", v.len(), self.d1)));
        }
        self.values[f * self.d1..(f + 1) * self.d1].copy_from_slice(v);
        Ok(())
    }

    /// Base cube at a cell index.
    pub fn cube(&self, idx: &[i64]) -> ParabolicCube {
        ParabolicCube { level: self.n_max, i0: idx[0], i: idx[1..].to_vec() }
    }

    /// μ-mass of each base cell, indexed by the offset of `i₁` in the window.
    pub(crate) fn x1_cell_measures(&self) -> Vec<f64> {
        let (lo, hi) = (self.window.lo()[1], self.window.hi()[1]);
        (lo..hi).map(|i1| level_cube_measure(self.n_max, i1, self.d(), self.params)).collect()
    }

    /// μ-mass of every base cell in row-major order.
    pub fn cell_measures(&self) -> Vec<f64> {
        let per_x1 = self.x1_cell_measures();
        let shape = self.window.shape();
        let inner: usize = shape[2..].iter().product();
        (0..self.window.len()).map(|f| per_x1[(f / inner) % shape[1]]).collect()
    }

    /// `∫ f dμ`, componentwise.
    pub fn integral(&self) -> Vec<f64> {
        let m = self.cell_measures();
        let mut out = vec![0.0; self.d1];
        for (c, mass) in m.iter().enumerate() {
            for k in 0..self.d1 {
                out[k] += mass * self.values[c * self.d1 + k];
            }
        }
        out
    }

    /// `(Σ_k ∫ |f^k|^p dμ)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let m = self.cell_measures();
        let mut s = 0.0;
        for (c, mass) in m.iter().enumerate() {
            for k in 0..self.d1 {
                s += mass * self.values[c * self.d1 + k].abs().powf(p);
            }
        }
        s.powf(1.0 / p)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> CellField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn scale(&self, c: f64) -> CellField {
        self.map(|v| c * v)
    }

    /// Componentwise absolute value.
    pub fn abs(&self) -> CellField {
        self.map(f64::abs)
    }

    /// Component `k` as a scalar field.
    pub fn component(&self, k: usize) -> CellField {
        let values = (0..self.window.len()).map(|c| self.values[c * self.d1 + k]).collect();
        CellField { d1: 1, params: self.params, n_max: self.n_max, window: self.window.clone(), values }
    }

    /// Cellwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &CellField, f: impl Fn(f64, f64) -> f64) -> Result<CellField> {
        self.check_same_grid(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a = f(*a, *b);
        }
        Ok(out)
    }

    pub(crate) fn check_same_grid(&self, other: &CellField) -> Result<()> {
        if self.window != other.window || self.n_max != other.n_max || self.d1 != other.d1 {
            return Err(Error::WindowMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// The same field on a larger window, zero on the new cells.
    pub fn pad_to(&self, window: &Window) -> Result<CellField> {
        if !window.contains_window(&self.window) {
            return Err(Error::WindowMismatch(format!(
                "{:?} does not contain {:?}",
                window, self.window
            )));
        }
        if *window == self.window {
            return Ok(self.clone());
        }
        let mut out = CellField::zeros(self.d1, self.params, self.n_max, window.clone())?;
        for (f, idx) in self.window.iter().enumerate() {
            let g = window.flat(&idx).expect("contained");
            out.values[g * self.d1..(g + 1) * self.d1]
                .copy_from_slice(&self.values[f * self.d1..(f + 1) * self.d1]);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes the JSON header line followed by one CSV row per nonzero cell.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header {
            d: self.d(),
            d1: self.d1,
            alpha: self.params.alpha(),
            n_max: self.n_max,
            window: self.window.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for (f, idx) in self.window.iter().enumerate() {
            let v = &self.values[f * self.d1..(f + 1) * self.d1];
            if v.iter().all(|x| *x == 0.0) {
                continue;
            }
            let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            row.extend(v.iter().map(|x| format!("{x:?}")));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<CellField> {
        let mut line = String::new();
        input.read_line(&mut line)?;
        let header: Header = serde_json::from_str(line.trim())?;
        if header.window.d() != header.d {
            return Err(Error::Parse("window dimension disagrees with d".into()));
        }
        let params = WeightParams::new(header.alpha)?;
        let mut field = CellField::zeros(header.d1, params, header.n_max, header.window)?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        for rec in rdr.records() {
            let rec = rec?;
            let d = header.d;
            if rec.len() != d + 1 + header.d1 {
                return Err(Error::Parse(format!("row has {} fields", rec.len())));
            }
            let parse_err = |e: &dyn std::fmt::Display| Error::Parse(e.to_string());
            let idx: Vec<i64> = (0..=d)
                .map(|a| rec[a].trim().parse::<i64>().map_err(|e| parse_err(&e)))
                .collect::<Result<_>>()?;
            let v: Vec<f64> = (d + 1..rec.len())
                .map(|a| rec[a].trim().parse::<f64>().map_err(|e| parse_err(&e)))
                .collect::<Result<_>>()?;
            field.set(&idx, &v)?;
        }
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_round_trip() {
        let w = Window::new(vec![-1, 0, -2], vec![2, 3, 1]).unwrap();
        let f = CellField::from_fn(2, WeightParams::new(0.5).unwrap(), 1, w, |i| {
            vec![(i[0] * i[1]) as f64 * 0.1, if i[2] == 0 { 0.0 } else { 1.0 / 3.0 }]
        })
        .unwrap();
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"d\":2,\"d1\":2,\"alpha\":0.5"));
        let g = CellField::read_from(&buf[..]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn padding_preserves_integral() {
        let w = Window::new(vec![0, 1], vec![2, 3]).unwrap();
        let f = CellField::from_fn(1, WeightParams::new(1.0).unwrap(), 0, w.clone(), |i| {
            vec![(i[0] + i[1]) as f64]
        })
        .unwrap();
        let big = Window::new(vec![-1, 0], vec![4, 5]).unwrap();
        let g = f.pad_to(&big).unwrap();
        assert_eq!(f.integral(), g.integral());
        assert!(g.pad_to(&w).is_err());
    }
}
