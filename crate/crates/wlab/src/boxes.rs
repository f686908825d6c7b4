//! Parabolic boxes `Q_r(t,x) = (t, t+r²) × (x¹−r, x¹+r) × B'_r(x')` and the
//! maximal and sharp functions over a declared finite family of them.
//!
//! `B'_r(x')` is the cube of half-width `r` in `ℝ^{d−1}`, so every mass is a
//! product of closed-form one-dimensional factors.

use serde::{Deserialize, Serialize};

use crate::dyadic::{CellField, ParabolicCube};
use crate::error::{Error, Result};
use crate::measure::{weight_between, WeightParams};

/// An axis-aligned space-time box; axis 0 is time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn d(&self) -> usize {
        self.lo.len() - 1
    }

    /// Intersection with `Ω = ℝ × ℝ^d_+`.
    pub fn clip_half_space(&self) -> AxisBox {
        let mut out = self.clone();
        out.lo[1] = out.lo[1].max(0.0);
        out.hi[1] = out.hi[1].max(out.lo[1]);
        out
    }

    /// `μ(box ∩ Ω)`.
    pub fn mass(&self, params: WeightParams) -> f64 {
        let c = self.clip_half_space();
        let mut m = weight_between(c.lo[1], c.hi[1], params);
        for a in (0..c.lo.len()).filter(|&a| a != 1) {
            m *= (c.hi[a] - c.lo[a]).max(0.0);
        }
        m
    }

    /// Whether the closed box contains the closed box `other`.
    pub fn contains_box(&self, other: &AxisBox) -> bool {
        (0..self.lo.len()).all(|a| self.lo[a] <= other.lo[a] && other.hi[a] <= self.hi[a])
    }

    /// Whether the open box contains a point.
    pub fn contains_point(&self, p: &[f64]) -> bool {
        (0..self.lo.len()).all(|a| self.lo[a] < p[a] && p[a] < self.hi[a])
    }
}

/// `Q_r(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicBox {
    pub t: f64,
    pub x1: f64,
    pub xprime: Vec<f64>,
    pub r: f64,
}

impl ParabolicBox {
    pub fn new(t: f64, x1: f64, xprime: Vec<f64>, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() || !t.is_finite() || !x1.is_finite() {
            return Err(Error::Domain(format!("box needs finite data and r > 0, got r = {r}")));
        }
        Ok(Self { t, x1, xprime, r })
    }

    pub fn d(&self) -> usize {
        self.xprime.len() + 1
    }

    pub fn extent(&self) -> AxisBox {
        let r = self.r;
        let mut lo = vec![self.t, self.x1 - r];
        let mut hi = vec![self.t + r * r, self.x1 + r];
        for &c in &self.xprime {
            lo.push(c - r);
            hi.push(c + r);
        }
        AxisBox { lo, hi }
    }

    /// Whether the box lies in `Ω`.
    pub fn in_half_space(&self) -> bool {
        self.x1 - self.r >= 0.0
    }

    /// `μ(Q ∩ Ω)`.
    pub fn mass(&self, params: WeightParams) -> f64 {
        self.extent().mass(params)
    }
}

/// Per-axis overlap weights of a box with the base cells of a field window.
struct Overlap {
    start: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

fn overlap(f: &CellField, b: &AxisBox) -> Overlap {
    let n = f.n_max();
    let s = 2f64.powi(-n);
    let w = f.window();
    let mut start = Vec::new();
    let mut weights = Vec::new();
    for a in 0..w.lo().len() {
        let side = if a == 0 { s * s } else { s };
        let (lo, hi) = if a == 1 { (b.lo[1].max(0.0), b.hi[1]) } else { (b.lo[a], b.hi[a]) };
        let first = ((lo / side).floor() as i64).max(w.lo()[a]);
        let last = ((hi / side).ceil() as i64 - 1).min(w.hi()[a] - 1);
        if last < first || hi <= lo {
            return Overlap { start: vec![0; w.lo().len()], weights: vec![Vec::new(); w.lo().len()] };
        }
        let ws = (first..=last)
            .map(|i| {
                let (c0, c1) = (i as f64 * side, (i + 1) as f64 * side);
                let (l, h) = (c0.max(lo), c1.min(hi));
                if h <= l {
                    0.0
                } else if a == 1 {
                    weight_between(l, h, f.params())
                } else {
                    h - l
                }
            })
            .collect();
        start.push((first - w.lo()[a]) as usize);
        weights.push(ws);
    }
    Overlap { start, weights }
}

/// Calls `visit(flat cell, μ-weight)` for every window cell meeting the box.
fn for_each_overlap(f: &CellField, b: &AxisBox, mut visit: impl FnMut(usize, f64)) {
    let ov = overlap(f, b);
    if ov.weights.iter().any(Vec::is_empty) {
        return;
    }
    let strides = crate::dyadic::strides(&f.window().shape());
    let shape: Vec<usize> = ov.weights.iter().map(Vec::len).collect();
    crate::dyadic::for_each_index(&shape, |_, idx| {
        let mut flat = 0;
        let mut m = 1.0;
        for a in 0..shape.len() {
            flat += (ov.start[a] + idx[a]) * strides[a];
            m *= ov.weights[a][idx[a]];
        }
        if m > 0.0 {
            visit(flat, m);
        }
    });
}

fn average_of(f: &CellField, b: &AxisBox, mass: f64, transform: impl Fn(f64) -> f64) -> Vec<f64> {
    let d1 = f.d1();
    let mut sums = vec![0.0; d1];
    for_each_overlap(f, b, |cell, m| {
        for c in 0..d1 {
            sums[c] += m * transform(f.values()[cell * d1 + c]);
        }
    });
    sums.iter().map(|s| s / mass).collect()
}

fn oscillation_of(f: &CellField, b: &AxisBox, mass: f64, power: f64) -> Vec<f64> {
    let d1 = f.d1();
    let avg = average_of(f, b, mass, |v| v);
    let mut sums = vec![0.0; d1];
    let mut covered = 0.0;
    for_each_overlap(f, b, |cell, m| {
        covered += m;
        for c in 0..d1 {
            sums[c] += m * (f.values()[cell * d1 + c] - avg[c]).abs().powf(power);
        }
    });
    let outside = (mass - covered).max(0.0);
    (0..d1).map(|c| (sums[c] + outside * avg[c].abs().powf(power)) / mass).collect()
}

fn checked_mass(f: &CellField, b: &AxisBox) -> Result<f64> {
    if b.d() != f.d() {
        return Err(Error::Dimension(format!("box of dimension {} for a field of dimension {}", b.d(), f.d())));
    }
    let m = b.mass(f.params());
    if !(m > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(m)
}

/// `⨍_{Q∩Ω} f dμ`, componentwise, with `f = 0` outside the window.
pub fn box_average(f: &CellField, q: &ParabolicBox) -> Result<Vec<f64>> {
    axis_box_average(f, &q.extent())
}

pub fn axis_box_average(f: &CellField, b: &AxisBox) -> Result<Vec<f64>> {
    let m = checked_mass(f, b)?;
    Ok(average_of(f, b, m, |v| v))
}

/// `⨍_{Q∩Ω} |f − f_Q|^power dμ`, componentwise.
pub fn box_oscillation(f: &CellField, q: &ParabolicBox, power: f64) -> Result<Vec<f64>> {
    let b = q.extent();
    let m = checked_mass(f, &b)?;
    Ok(oscillation_of(f, &b, m, power))
}

/// Radii `2^{−(n_max+1)}, …, 2^{n_top}`.
pub fn dyadic_ladder(n_max: i32, n_top: i32) -> Vec<f64> {
    (-(n_max + 1)..=n_top).map(|k| 2f64.powi(k)).collect()
}

/// Sup of `eval` over the lattice boxes of each radius whose open extent
/// contains a cell centre.
///
/// Anchors sit on the lattice `r²/4` in time and `r/2` in space, and boxes
/// stay inside `Ω`.
fn family_sup(f: &CellField, radii: &[f64], eval: impl Fn(&AxisBox, f64) -> Vec<f64>) -> Result<CellField> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::EmptyFamily);
    }
    let d1 = f.d1();
    let w = f.window();
    let axes = w.lo().len();
    let s = 2f64.powi(-f.n_max());
    let sides: Vec<f64> = (0..axes).map(|a| if a == 0 { s * s } else { s }).collect();
    let shape = w.shape();
    let strides = crate::dyadic::strides(&shape);
    let mut run = vec![f64::NEG_INFINITY; f.values().len()];
    for &r in radii {
        let lens: Vec<f64> = (0..axes).map(|a| if a == 0 { r * r } else { 2.0 * r }).collect();
        let steps: Vec<f64> = (0..axes).map(|a| if a == 0 { r * r / 4.0 } else { r / 2.0 }).collect();
        // Lattice indices of the lower edges that can contain some centre.
        let mut j_lo = Vec::with_capacity(axes);
        let mut j_count = Vec::with_capacity(axes);
        for a in 0..axes {
            let c_min = (w.lo()[a] as f64 + 0.5) * sides[a];
            let c_max = (w.hi()[a] as f64 - 0.5) * sides[a];
            let mut lo = ((c_min - lens[a]) / steps[a]).floor() as i64;
            if a == 1 {
                lo = lo.max(0);
            }
            let hi = (c_max / steps[a]).ceil() as i64;
            j_lo.push(lo);
            j_count.push((hi - lo + 1).max(0) as usize);
        }
        let mut ranges: Vec<Vec<(usize, usize)>> = Vec::with_capacity(axes);
        for a in 0..axes {
            ranges.push(
                (0..j_count[a])
                    .map(|j| {
                        let e = (j_lo[a] + j as i64) as f64 * steps[a];
                        let first = ((e / sides[a] - 0.5).floor() as i64 + 1).max(w.lo()[a]);
                        let last = ((e + lens[a]) / sides[a] - 0.5).ceil() as i64 - 1;
                        let last = last.min(w.hi()[a] - 1);
                        if last < first {
                            (1, 0)
                        } else {
                            ((first - w.lo()[a]) as usize, (last - w.lo()[a]) as usize)
                        }
                    })
                    .collect(),
            );
        }
        crate::dyadic::for_each_index(&j_count, |_, jdx| {
            if (0..axes).any(|a| ranges[a][jdx[a]].0 > ranges[a][jdx[a]].1) {
                return;
            }
            let lo: Vec<f64> = (0..axes).map(|a| (j_lo[a] + jdx[a] as i64) as f64 * steps[a]).collect();
            let hi: Vec<f64> = (0..axes).map(|a| lo[a] + lens[a]).collect();
            let b = AxisBox { lo, hi };
            let vals = eval(&b, b.mass(f.params()));
            let sub: Vec<usize> = (0..axes).map(|a| ranges[a][jdx[a]].1 - ranges[a][jdx[a]].0 + 1).collect();
            crate::dyadic::for_each_index(&sub, |_, k| {
                let mut flat = 0;
                for a in 0..axes {
                    flat += (ranges[a][jdx[a]].0 + k[a]) * strides[a];
                }
                for c in 0..d1 {
                    let slot = &mut run[flat * d1 + c];
                    *slot = slot.max(vals[c]);
                }
            });
        });
    }
    let mut out = f.clone();
    for (o, v) in out.values_mut().iter_mut().zip(&run) {
        *o = if v.is_finite() { *v } else { 0.0 };
    }
    Ok(out)
}

/// `𝕄f = sup_{Q ∋ centre} ⨍_Q |f| dμ` over the declared family.
pub fn maximal_family(f: &CellField, radii: &[f64]) -> Result<CellField> {
    family_sup(f, radii, |b, m| average_of(f, b, m, f64::abs))
}

/// `f^♯ = sup_{Q ∋ centre} ⨍_Q |f − f_Q| dμ` over the declared family.
pub fn sharp_family(f: &CellField, radii: &[f64]) -> Result<CellField> {
    family_sup(f, radii, |b, m| oscillation_of(f, b, m, 1.0))
}

/// The box `Q_(n) = Q_{d/2ⁿ}(i₀/4ⁿ, ((i₁+d)/2ⁿ, i₂/2ⁿ, …))` whose closure
/// contains the cube `c`.
///
/// Containment is checked on construction; should it fail, the radius is
/// widened by the smallest sufficient factor and a warning is logged.
pub fn comparison_box(c: &ParabolicCube) -> ParabolicBox {
    let d = c.d() as f64;
    let s = 2f64.powi(-c.level);
    let t = c.i0 as f64 * s * s;
    let x1 = (c.i[0] as f64 + d) * s;
    let xprime: Vec<f64> = c.i[1..].iter().map(|&i| i as f64 * s).collect();
    let mut q = ParabolicBox { t, x1, xprime, r: d * s };
    let cube = cube_box(c);
    if !q.extent().contains_box(&cube) {
        let mut factor: f64 = 1.0;
        let e = q.extent();
        factor = factor.max(((cube.hi[0] - t) / (e.hi[0] - t)).sqrt());
        for a in 1..cube.lo.len() {
            let centre = 0.5 * (e.lo[a] + e.hi[a]);
            let need = (cube.hi[a] - centre).max(centre - cube.lo[a]);
            factor = factor.max(need / q.r);
        }
        log::warn!("comparison box for {c:?} widened by factor {factor}");
        q.r *= factor;
    }
    q
}

/// Closed extent of a dyadic cube.
pub fn cube_box(c: &ParabolicCube) -> AxisBox {
    let (t0, t1) = c.time_extent();
    let mut lo = vec![t0];
    let mut hi = vec![t1];
    for k in 0..c.d() {
        let (a, b) = c.space_extent(k);
        lo.push(a);
        hi.push(b);
    }
    AxisBox { lo, hi }
}

/// `Q* = 3Q ∩ Ω`: time interval tripled about its centre, radii tripled,
/// then clipped to `x¹ ≥ 0`.
pub fn expand_clip(q: &ParabolicBox) -> AxisBox {
    let r2 = q.r * q.r;
    let centre = q.t + 0.5 * r2;
    let r3 = 3.0 * q.r;
    let mut lo = vec![centre - 1.5 * r2, q.x1 - r3];
    let mut hi = vec![centre + 1.5 * r2, q.x1 + r3];
    for &c in &q.xprime {
        lo.push(c - r3);
        hi.push(c + r3);
    }
    AxisBox { lo, hi }.clip_half_space()
}
