//! Monte Carlo representation of `𝓔f(x) = E ∫₀^∞ f(σ_t x) dt` for the
//! degenerate diffusion `dx_t = √2 x¹_t dw_t + 3 x¹_t e₁ dt`, and the discrete
//! operator `𝓛 = M²Δ + 3MD₁`.
//!
//! With `ξ_t = √2 w¹_t + 2t` and `η^j_t = √2 ∫₀ᵗ e^{ξ_s} dw^j_s` the flow is
//! `(σ_t x)¹ = e^{ξ_t} x¹`, `(σ_t x)' = x' + x¹ η_t`. Increments of `ξ` are
//! drawn exactly; `η` uses Euler–Maruyama on the declared step. Path `k`
//! draws from its own ChaCha8 stream, so estimates do not depend on how the
//! paths are scheduled.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridSpec, NodeField};

/// Paths are reduced in fixed blocks of this size, then blocks in order.
const BLOCK: usize = 256;

/// `{seed, n_paths, step, T_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSpec {
    pub seed: u64,
    pub n_paths: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(rename = "T_max", default = "default_t_max")]
    pub t_max: f64,
}

fn default_step() -> f64 {
    1e-3
}

fn default_t_max() -> f64 {
    20.0
}

impl BatchSpec {
    pub fn new(seed: u64, n_paths: usize, step: f64, t_max: f64) -> Result<Self> {
        let b = Self { seed, n_paths, step, t_max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 || !(self.step > 0.0) || !(self.t_max >= self.step) || !self.t_max.is_finite() {
            return Err(Error::Config(format!(
                "batch needs n_paths >= 2, step > 0 and T_max >= step, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.step).round() as usize
    }

    fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }
}

/// The driving noise of one path, advanced one step at a time.
#[derive(Debug, Clone)]
pub struct PathState {
    rng: ChaCha8Rng,
    step: f64,
    pub t: f64,
    pub xi: f64,
    pub eta: Vec<f64>,
}

impl PathState {
    fn new(batch: &BatchSpec, path: usize, d: usize) -> Self {
        Self { rng: batch.rng(path), step: batch.step, t: 0.0, xi: 0.0, eta: vec![0.0; d - 1] }
    }

    fn advance(&mut self) {
        let s = self.step.sqrt();
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let e = self.xi.exp();
        for eta in self.eta.iter_mut() {
            let zj: f64 = StandardNormal.sample(&mut self.rng);
            *eta += std::f64::consts::SQRT_2 * e * s * zj;
        }
        self.xi += std::f64::consts::SQRT_2 * s * z + 2.0 * self.step;
        self.t += self.step;
    }

    /// `σ_t x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(x.len());
        y.push(self.xi.exp() * x[0]);
        for (k, e) in self.eta.iter().enumerate() {
            y.push(x[k + 1] + x[0] * e);
        }
        y
    }
}

/// Samples `σ_t x` for every path at each of `times` (rounded to the step).
/// Row `path`, then time, then coordinate.
pub fn simulate_sigma(x: &[f64], batch: &BatchSpec, times: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    batch.validate()?;
    if x.is_empty() || x[0] < 0.0 {
        return Err(Error::Domain(format!("start point must lie in the closed half space, got {x:?}")));
    }
    let stops: Vec<usize> = times.iter().map(|t| (t / batch.step).round() as usize).collect();
    let last = stops.iter().copied().max().unwrap_or(0);
    Ok((0..batch.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut state = PathState::new(batch, path, x.len());
            let mut out = vec![Vec::new(); stops.len()];
            for k in 0..=last {
                for (slot, s) in stops.iter().enumerate() {
                    if *s == k {
                        out[slot] = state.apply(x);
                    }
                }
                if k < last {
                    state.advance();
                }
            }
            out
        })
        .collect())
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// `sup|f| · e^{−T_max}`, the truncation allowance of the time integral.
    pub tail_budget: f64,
}

fn mean_and_stderr(sum: f64, sumsq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// `𝓔f(x)` by left Riemann sums of `f(σ_t x)` on `[0, T_max]`. `sup_f` is a
/// bound on `|f|` used for the tail budget.
pub fn estimate_ef(f: &(dyn Fn(&[f64]) -> f64 + Sync), sup_f: f64, x: &[f64], batch: &BatchSpec) -> Result<Estimate> {
    batch.validate()?;
    if x.is_empty() {
        return Err(Error::Dimension("empty point".into()));
    }
    let tail_budget = sup_f.abs() * (-batch.t_max).exp();
    if x[0] <= 0.0 {
        return Ok(Estimate { value: 0.0, stderr: 0.0, tail_budget: 0.0 });
    }
    let n_steps = batch.n_steps();
    let per_path: Vec<f64> = (0..batch.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut state = PathState::new(batch, path, x.len());
            let mut acc = 0.0;
            for _ in 0..n_steps {
                acc += f(&state.apply(x)) * batch.step;
                state.advance();
            }
            acc
        })
        .collect();
    let (sum, sumsq) = per_path.iter().fold((0.0, 0.0), |(s, q), v| (s + v, q + v * v));
    let (value, stderr) = mean_and_stderr(sum, sumsq, batch.n_paths);
    Ok(Estimate { value, stderr, tail_budget })
}

/// `𝓔f` at every node of a spatial grid, with common random numbers.
#[derive(Debug, Clone)]
pub struct GridEstimate {
    pub mean: NodeField,
    pub stderr: NodeField,
    pub tail_budget: f64,
    /// Mean and standard error of `⟨𝓔f, w⟩` for each requested weight field.
    pub functionals: Vec<(f64, f64)>,
}

/// Axis box outside which `f` vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Estimates `𝓔f` on `grid` (spatial). Along each path only nodes whose
/// image `σ_t x` lies in `support` are evaluated. `functionals` are node
/// weights `w`; the estimate of `Σ_nodes w·𝓔f·h^d` is reported for each.
pub fn estimate_ef_grid(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    sup_f: f64,
    support: &Support,
    grid: &GridSpec,
    batch: &BatchSpec,
    functionals: &[NodeField],
) -> Result<GridEstimate> {
    batch.validate()?;
    let d = grid.d();
    if grid.nt != 0 || support.lo.len() != d || support.hi.len() != d {
        return Err(Error::Grid("grid estimates need a spatial grid and a matching support box".into()));
    }
    if support.lo[0] <= 0.0 {
        return Err(Error::Domain("support must stay away from x1 = 0".into()));
    }
    for w in functionals {
        if w.grid() != grid || w.d1() != 1 {
            return Err(Error::Grid("functional weights must live on the estimate grid".into()));
        }
    }
    let shape = grid.spatial_shape();
    let n_nodes = grid.n_spatial_nodes();
    let strides = crate::dyadic::strides(&shape);
    let cell: f64 = (0..d).map(|k| grid.h(k)).product();
    let n_steps = batch.n_steps();
    let nf = functionals.len();

    // Node index range [lo, hi] along `axis` whose coordinate lies in [a, b].
    let range = |axis: usize, a: f64, b: f64| -> Option<(usize, usize)> {
        let h = grid.h(axis);
        let lo = ((a - grid.x_lo[axis]) / h).ceil().max(0.0);
        let hi = ((b - grid.x_lo[axis]) / h).floor().min(grid.nx[axis] as f64);
        (lo <= hi).then_some((lo as usize, hi as usize))
    };

    let run_path = |path: usize, acc: &mut [f64]| {
        acc.iter_mut().for_each(|v| *v = 0.0);
        let mut state = PathState::new(batch, path, d);
        let mut x = vec![0.0; d];
        for _ in 0..n_steps {
            let e = state.xi.exp();
            if let Some((i_lo, i_hi)) = range(0, support.lo[0] / e, support.hi[0] / e) {
                for i in i_lo..=i_hi {
                    x[0] = grid.coord(0, i);
                    if x[0] <= 0.0 {
                        continue;
                    }
                    // Transverse nodes with x' + x¹η inside the support.
                    let mut ranges = Vec::with_capacity(d - 1);
                    for k in 1..d {
                        let shift = x[0] * state.eta[k - 1];
                        match range(k, support.lo[k] - shift, support.hi[k] - shift) {
                            Some(r) => ranges.push(r),
                            None => break,
                        }
                    }
                    if ranges.len() != d - 1 {
                        continue;
                    }
                    let counts: Vec<usize> = ranges.iter().map(|(a, b)| b - a + 1).collect();
                    crate::dyadic::for_each_index(&counts, |_, off| {
                        let mut node = i * strides[0];
                        for k in 1..d {
                            let j = ranges[k - 1].0 + off[k - 1];
                            x[k] = grid.coord(k, j);
                            node += j * strides[k];
                        }
                        let y = state.apply(&x);
                        acc[node] += f(&y) * batch.step;
                    });
                }
            }
            state.advance();
        }
    };

    let n_blocks = batch.n_paths.div_ceil(BLOCK);
    let partials: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut sum = vec![0.0; n_nodes];
            let mut sumsq = vec![0.0; n_nodes];
            let mut fsum = vec![0.0; nf];
            let mut fsumsq = vec![0.0; nf];
            let mut acc = vec![0.0; n_nodes];
            for path in b * BLOCK..((b + 1) * BLOCK).min(batch.n_paths) {
                run_path(path, &mut acc);
                for n in 0..n_nodes {
                    sum[n] += acc[n];
                    sumsq[n] += acc[n] * acc[n];
                }
                for (k, w) in functionals.iter().enumerate() {
                    let v: f64 = w.values().iter().zip(&acc).map(|(a, b)| a * b).sum::<f64>() * cell;
                    fsum[k] += v;
                    fsumsq[k] += v * v;
                }
            }
            (sum, sumsq, fsum, fsumsq)
        })
        .collect();
    let mut sum = vec![0.0; n_nodes];
    let mut sumsq = vec![0.0; n_nodes];
    let mut fsum = vec![0.0; nf];
    let mut fsumsq = vec![0.0; nf];
    for (s, q, fs, fq) in &partials {
        for n in 0..n_nodes {
            sum[n] += s[n];
            sumsq[n] += q[n];
        }
        for k in 0..nf {
            fsum[k] += fs[k];
            fsumsq[k] += fq[k];
        }
    }
    let stats: Vec<(f64, f64)> = (0..n_nodes).map(|n| mean_and_stderr(sum[n], sumsq[n], batch.n_paths)).collect();
    Ok(GridEstimate {
        mean: NodeField::from_values(grid.clone(), 1, stats.iter().map(|s| s.0).collect())?,
        stderr: NodeField::from_values(grid.clone(), 1, stats.iter().map(|s| s.1).collect())?,
        tail_budget: sup_f.abs() * (-batch.t_max).exp(),
        functionals: (0..nf).map(|k| mean_and_stderr(fsum[k], fsumsq[k], batch.n_paths)).collect(),
    })
}

/// Writes `x, estimate, stderr, tail_budget` rows (`x1, …, xd` when `d > 1`).
pub fn write_estimates<W: Write>(est: &GridEstimate, out: W) -> Result<()> {
    let grid = est.mean.grid();
    let d = grid.d();
    let mut wtr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = if d == 1 { vec!["x".into()] } else { (1..=d).map(|k| format!("x{k}")).collect() };
    header.extend(["estimate", "stderr", "tail_budget"].map(String::from));
    wtr.write_record(&header)?;
    let mut rows = Vec::new();
    crate::dyadic::for_each_index(&grid.spatial_shape(), |n, idx| {
        let mut row: Vec<String> = (0..d).map(|k| format!("{:?}", grid.coord(k, idx[k]))).collect();
        row.push(format!("{:?}", est.mean.values()[n]));
        row.push(format!("{:?}", est.stderr.values()[n]));
        row.push(format!("{:?}", est.tail_budget));
        rows.push(row);
    });
    for row in rows {
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Discrete `𝓛` on the nodes of a spatial grid as `(row, col, value)`
/// triplets: `(x¹)² Δ_h + 3x¹ D_{1,h}` with central stencils at interior
/// nodes, zero rows on the faces.
fn l_triplets(grid: &GridSpec) -> Vec<(usize, usize, f64)> {
    let shape = grid.spatial_shape();
    let strides = crate::dyadic::strides(&shape);
    let d = grid.d();
    let mut out = Vec::new();
    crate::dyadic::for_each_index(&shape, |n, idx| {
        if (0..d).any(|k| idx[k] == 0 || idx[k] == shape[k] - 1) {
            return;
        }
        let x1 = grid.coord(0, idx[0]);
        let m2 = x1 * x1;
        for k in 0..d {
            let h = grid.h(k);
            let c = m2 / (h * h);
            out.push((n, n + strides[k], c));
            out.push((n, n - strides[k], c));
            out.push((n, n, -2.0 * c));
        }
        let c = 3.0 * x1 / (2.0 * grid.h(0));
        out.push((n, n + strides[0], c));
        out.push((n, n - strides[0], -c));
    });
    out
}

fn check_scalar_spatial(u: &NodeField) -> Result<()> {
    if u.grid().nt != 0 || u.d1() != 1 {
        return Err(Error::Grid("expected a scalar spatial field".into()));
    }
    Ok(())
}

/// `𝓛u = (x¹)²Δu + 3x¹D₁u` at interior nodes; zero on the faces.
pub fn apply_l(u: &NodeField) -> Result<NodeField> {
    check_scalar_spatial(u)?;
    let mut out = vec![0.0; u.values().len()];
    for (r, c, v) in l_triplets(u.grid()) {
        out[r] += v * u.values()[c];
    }
    NodeField::from_values(u.grid().clone(), 1, out)
}

/// `𝓛*φ` as the transpose of the assembled discrete `𝓛`.
pub fn apply_l_adjoint(phi: &NodeField) -> Result<NodeField> {
    check_scalar_spatial(phi)?;
    let mut out = vec![0.0; phi.values().len()];
    for (r, c, v) in l_triplets(phi.grid()) {
        out[c] += v * phi.values()[r];
    }
    NodeField::from_values(phi.grid().clone(), 1, out)
}

/// Node inner product `Σ u v h^d`.
pub fn inner(u: &NodeField, v: &NodeField) -> Result<f64> {
    if u.grid() != v.grid() || u.d1() != v.d1() {
        return Err(Error::Grid("inner product of fields on different grids".into()));
    }
    let cell: f64 = (0..u.d()).map(|k| u.grid().h(k)).product();
    Ok(u.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>() * cell)
}

/// `⟨𝓔f, 𝓛*φ⟩ − ⟨f, φ⟩` for each test function.
pub fn weak_residual(ef: &NodeField, f: &NodeField, tests: &[NodeField]) -> Result<Vec<f64>> {
    tests.iter().map(|phi| Ok(inner(ef, &apply_l_adjoint(phi)?)? - inner(f, phi)?)).collect()
}

/// `f¹ = MD₁𝓔f + 2𝓔f`, `f^j = MD_j𝓔f`, the reconstruction `MD_i f^i` and
/// the `L_p` bookkeeping around it.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub components: Vec<NodeField>,
    pub reconstruction: NodeField,
    /// `‖MD_i f^i − f‖_{L_p}`.
    pub reconstruction_error: f64,
    /// `Σ‖f^i‖_{L_p} / ‖f‖_{L_p}`; 0 when `f = 0`.
    pub norm_ratio: f64,
}

fn m_d(u: &NodeField, axis: usize) -> Result<NodeField> {
    let mut beta = vec![0; u.d()];
    beta[axis] = 1;
    Ok(u.derivative(&beta, 0)?.multiply_by(|_, x| x[0]))
}

/// Builds the divergence form of `f` from an estimate of `𝓔f`.
pub fn divergence_decomposition(ef: &NodeField, f: &NodeField, p: f64) -> Result<Decomposition> {
    check_scalar_spatial(ef)?;
    check_scalar_spatial(f)?;
    if ef.grid() != f.grid() {
        return Err(Error::Grid("f and its estimate live on different grids".into()));
    }
    let d = ef.d();
    let mut components = Vec::with_capacity(d);
    components.push(m_d(ef, 0)?.zip_with(ef, |a, b| a + 2.0 * b)?);
    for j in 1..d {
        components.push(m_d(ef, j)?);
    }
    let mut reconstruction = NodeField::zeros(ef.grid().clone(), 1);
    for (i, c) in components.iter().enumerate() {
        reconstruction = reconstruction.zip_with(&m_d(c, i)?, |a, b| a + b)?;
    }
    let spec = crate::sobolev::NormSpec::lp(p, d as f64)?;
    let norm = |u: &NodeField| crate::sobolev::weighted_lp_norm(u, &spec);
    let reconstruction_error = norm(&reconstruction.zip_with(f, |a, b| a - b)?)?;
    let fnorm = norm(f)?;
    let total: f64 = components.iter().map(norm).sum::<Result<f64>>()?;
    let norm_ratio = if fnorm == 0.0 { 0.0 } else { total / fnorm };
    Ok(Decomposition { components, reconstruction, reconstruction_error, norm_ratio })
}

/// `𝓔f` for `d = 1` by quadrature of the closed form
/// `½ ∫ f(x e^y) min(1, e^{2y}) dy` (the expected occupation density of
/// `ξ`), for `f` supported in `[a, b] ⊂ (0, ∞)`.
pub fn ef_exact_1d(f: &dyn Fn(f64) -> f64, support: (f64, f64), x: f64, n: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (ylo, yhi) = ((support.0 / x).ln(), (support.1 / x).ln());
    let h = (yhi - ylo) / n as f64;
    let g = |y: f64| f(x * y.exp()) * 0.5 * (2.0 * y).exp().min(1.0);
    // Split at y = 0 where the density has a kink.
    let simpson = |a: f64, b: f64, m: usize| {
        let m = m.max(2) & !1;
        let step = (b - a) / m as f64;
        let mut s = g(a) + g(b);
        for k in 1..m {
            s += g(a + k as f64 * step) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * step / 3.0
    };
    if ylo < 0.0 && yhi > 0.0 {
        let m = ((-ylo) / h).ceil() as usize;
        simpson(ylo, 0.0, m) + simpson(0.0, yhi, n.saturating_sub(m).max(2))
    } else {
        simpson(ylo, yhi, n)
    }
}

#[cfg(test)]
mod tests;
