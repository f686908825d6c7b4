//! Finite-difference solvers for `u_t = A^{ij}(t) u_{x^i x^j} + f` and
//! `A^{ij} u_{x^i x^j} = f` on a truncated half space, with the a priori
//! estimate ratios computed from their output.
//!
//! Unknowns are the interior nodes; every face of the box carries a value
//! condition. Each time slab with fixed coefficients is factored once with a
//! sparse LU.

use std::collections::HashMap;

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridSpec, NodeField};
use crate::sobolev::{derivative_term, NormSpec};

/// Number of random directions tried by [`validate_ellipticity`] inside the
/// solvers.
pub const ELLIPTICITY_SAMPLES: usize = 4096;

/// Matrices `A^{ij}` (each `d₁ × d₁`), piecewise constant in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemCoefficients {
    d: usize,
    d1: usize,
    /// Start times of pieces after the first; the first piece covers `(−∞, breakpoints[0])`.
    breakpoints: Vec<f64>,
    /// Each piece stores `A^{ij}_{kr}` at `((i·d + j)·d₁ + k)·d₁ + r`.
    pieces: Vec<Vec<f64>>,
    bound: f64,
}

/// `A[i][j][k][r]` as nested arrays.
pub type NestedMatrices = Vec<Vec<Vec<Vec<f64>>>>;

fn flatten(a: &NestedMatrices) -> Result<(usize, usize, Vec<f64>)> {
    let d = a.len();
    let d1 = a.first().and_then(|r| r.first()).map_or(0, |m| m.len());
    if d == 0 || d1 == 0 {
        return Err(Error::Dimension("empty coefficient array".into()));
    }
    let mut out: Vec<f64> = Vec::with_capacity(d * d * d1 * d1);
    for row in a {
        if row.len() != d {
            return Err(Error::Dimension("coefficient array must be d x d".into()));
        }
        for m in row {
            if m.len() != d1 || m.iter().any(|r| r.len() != d1) {
                return Err(Error::Dimension("every A^ij must be d1 x d1".into()));
            }
            out.extend(m.iter().flatten().copied());
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("coefficients must be finite".into()));
    }
    Ok((d, d1, out))
}

impl SystemCoefficients {
    /// Time-independent coefficients; `K` defaults to the largest Frobenius norm.
    pub fn constant(a: &NestedMatrices) -> Result<Self> {
        Self::piecewise(&[], &[a.clone()])
    }

    /// `pieces[0]` before `breakpoints[0]`, `pieces[k]` on `[breakpoints[k−1], breakpoints[k])`.
    pub fn piecewise(breakpoints: &[f64], pieces: &[NestedMatrices]) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::Config(format!("{} pieces need {} breakpoints", pieces.len(), pieces.len() - 1)));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("breakpoints must increase".into()));
        }
        let mut flat = Vec::with_capacity(pieces.len());
        let mut dims = None;
        for p in pieces {
            let (d, d1, v) = flatten(p)?;
            if dims.is_some_and(|x| x != (d, d1)) {
                return Err(Error::Dimension("pieces have different shapes".into()));
            }
            dims = Some((d, d1));
            flat.push(v);
        }
        let (d, d1) = dims.expect("at least one piece");
        let mut out = Self { d, d1, breakpoints: breakpoints.to_vec(), pieces: flat, bound: 0.0 };
        out.bound = out.max_frobenius();
        Ok(out)
    }

    /// `A^{ij} = δ^{ij} I`.
    pub fn identity(d: usize, d1: usize) -> Self {
        let a: NestedMatrices = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (0..d1).map(|k| (0..d1).map(|r| if i == j && k == r { 1.0 } else { 0.0 }).collect()).collect()
                    })
                    .collect()
            })
            .collect();
        Self::constant(&a).expect("identity is well formed")
    }

    /// Declares `K`; fails if some `|A^{ij}|` exceeds it.
    pub fn with_bound(mut self, k: f64) -> Result<Self> {
        let m = self.max_frobenius();
        if m > k {
            return Err(Error::Config(format!("|A^ij| reaches {m}, above the declared K = {k}")));
        }
        self.bound = k;
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn n_pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn piece_at(&self, t: f64) -> usize {
        self.breakpoints.iter().take_while(|b| **b <= t).count()
    }

    /// `A^{ij}_{kr}` in piece `piece`.
    pub fn entry(&self, piece: usize, i: usize, j: usize, k: usize, r: usize) -> f64 {
        self.pieces[piece][((i * self.d + j) * self.d1 + k) * self.d1 + r]
    }

    pub fn max_frobenius(&self) -> f64 {
        let block = self.d1 * self.d1;
        self.pieces
            .iter()
            .flat_map(|p| p.chunks(block))
            .map(|m| m.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Symmetric part of the `(d·d₁) × (d·d₁)` form matrix; row `i·d₁ + k`
    /// pairs with column `j·d₁ + r`.
    fn form_matrix(&self, piece: usize) -> Vec<f64> {
        let n = self.d * self.d1;
        let mut s = vec![0.0; n * n];
        for i in 0..self.d {
            for j in 0..self.d {
                for k in 0..self.d1 {
                    for r in 0..self.d1 {
                        let v = self.entry(piece, i, j, k, r) / 2.0;
                        s[(i * self.d1 + k) * n + j * self.d1 + r] += v;
                        s[(j * self.d1 + r) * n + i * self.d1 + k] += v;
                    }
                }
            }
        }
        s
    }
}

/// Certified `δ`: the minimum of `Σ_{i,j} (ξ^i)ᵀ A^{ij} ξ^j` over unit
/// `ξ ∈ ℝ^{d₁×d}`, estimated from `samples` deterministic random directions
/// and refined by shifted power iteration from the best one.
pub fn validate_ellipticity(coeffs: &SystemCoefficients, samples: usize) -> Result<f64> {
    let n = coeffs.d * coeffs.d1;
    let mut delta = f64::INFINITY;
    for piece in 0..coeffs.n_pieces() {
        let s = coeffs.form_matrix(piece);
        let apply = |x: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| s[i * n + j] * x[j]).sum()).collect() };
        let rayleigh = |x: &[f64]| -> f64 {
            let sx = apply(x);
            let num: f64 = x.iter().zip(&sx).map(|(a, b)| a * b).sum();
            num / x.iter().map(|v| v * v).sum::<f64>()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(piece as u64);
        let mut best = vec![0.0; n];
        let mut best_q = f64::INFINITY;
        for _ in 0..samples.max(1) {
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let q = rayleigh(&x);
            if q < best_q {
                best_q = q;
                best = x;
            }
        }
        // Power iteration on cI − S converges to the eigenvector of the
        // smallest eigenvalue of S.
        let shift = (0..n).map(|i| (0..n).map(|j| s[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
        let mut x = best.clone();
        for _ in 0..2000 {
            let sx = apply(&x);
            let mut y: Vec<f64> = x.iter().zip(&sx).map(|(a, b)| shift * a - b).collect();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            y.iter_mut().for_each(|v| *v /= norm);
            x = y;
        }
        let q = best_q.min(rayleigh(&x));
        delta = delta.min(q);
    }
    if !(delta > 0.0) {
        return Err(Error::NotElliptic(delta));
    }
    log::debug!("certified ellipticity delta = {delta}");
    Ok(delta)
}

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    ImplicitEuler,
    CrankNicolson,
}

/// Domain `(0, T] × [0, L] × ∏[−w_k, w_k]`, grid counts, scheme and the
/// `(p, θ)` of the estimate norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub widths: Vec<f64>,
    pub n1: usize,
    #[serde(default)]
    pub n_trans: Vec<usize>,
    #[serde(rename = "T", default)]
    pub t_final: f64,
    #[serde(default)]
    pub nt: usize,
    #[serde(default)]
    pub scheme: Scheme,
    pub p: f64,
    pub theta: f64,
}

impl SolverConfig {
    pub fn d(&self) -> usize {
        1 + self.widths.len()
    }

    /// Space-time grid of the parabolic problem.
    pub fn grid(&self) -> Result<GridSpec> {
        if self.widths.len() != self.n_trans.len() {
            return Err(Error::Config("widths and n_trans must have the same length".into()));
        }
        if self.nt == 0 || !(self.t_final > 0.0) {
            return Err(Error::Config("parabolic problems need T > 0 and nt > 0".into()));
        }
        GridSpec::half_space(self.l, &self.widths, self.n1, &self.n_trans, self.t_final, self.nt)
    }

    /// Spatial grid of the elliptic problem.
    pub fn spatial_grid(&self) -> Result<GridSpec> {
        if self.widths.len() != self.n_trans.len() {
            return Err(Error::Config("widths and n_trans must have the same length".into()));
        }
        GridSpec::half_space(self.l, &self.widths, self.n1, &self.n_trans, 0.0, 0)
    }

    pub fn norm(&self) -> Result<NormSpec> {
        NormSpec::lp(self.p, self.theta)
    }

    /// The same problem with every grid count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> SolverConfig {
        SolverConfig {
            n1: self.n1 * factor,
            n_trans: self.n_trans.iter().map(|n| n * factor).collect(),
            nt: self.nt * factor,
            ..self.clone()
        }
    }

    /// The domain of `u(c²t, cx)`: lengths divided by `c`, horizon by `c²`.
    pub fn dilated(&self, c: f64) -> SolverConfig {
        SolverConfig {
            l: self.l / c,
            widths: self.widths.iter().map(|w| w / c).collect(),
            t_final: self.t_final / (c * c),
            ..self.clone()
        }
    }
}

/// Interior-node numbering of a spatial grid.
struct Interior {
    shape: Vec<usize>,
    strides: Vec<usize>,
    /// Full node index of every interior node.
    nodes: Vec<usize>,
    /// Interior index of every full node, if interior.
    index: Vec<Option<usize>>,
}

impl Interior {
    fn new(grid: &GridSpec) -> Result<Self> {
        let shape = grid.spatial_shape();
        if shape.iter().any(|n| *n < 3) {
            return Err(Error::Grid("every axis needs at least one interior node".into()));
        }
        let strides = crate::dyadic::strides(&shape);
        let inner: Vec<usize> = shape.iter().map(|n| n - 2).collect();
        let mut nodes = Vec::new();
        let mut index = vec![None; shape.iter().product()];
        crate::dyadic::for_each_index(&inner, |k, idx| {
            let full: usize = idx.iter().zip(&strides).map(|(i, s)| (i + 1) * s).sum();
            nodes.push(full);
            index[full] = Some(k);
        });
        Ok(Self { shape, strides, nodes, index })
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Calls `emit(neighbour node, k, r, weight)` for the stencil of
/// `A^{ij}_{kr} D_i D_j` at the interior node `node`.
fn stencil(coeffs: &SystemCoefficients, piece: usize, grid: &GridSpec, it: &Interior, node: usize, mut emit: impl FnMut(usize, usize, usize, f64)) {
    let d = coeffs.d;
    let d1 = coeffs.d1;
    let step = |n: usize, axis: usize, s: i64| (n as i64 + s * it.strides[axis] as i64) as usize;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d1 {
                for r in 0..d1 {
                    let a = coeffs.entry(piece, i, j, k, r);
                    if a == 0.0 {
                        continue;
                    }
                    if i == j {
                        let c = a / (grid.h(i) * grid.h(i));
                        emit(step(node, i, 1), k, r, c);
                        emit(step(node, i, -1), k, r, c);
                        emit(node, k, r, -2.0 * c);
                    } else {
                        let c = a / (4.0 * grid.h(i) * grid.h(j));
                        for (si, sj, sign) in [(1, 1, 1.0), (-1, -1, 1.0), (1, -1, -1.0), (-1, 1, -1.0)] {
                            emit(step(step(node, i, si), j, sj), k, r, sign * c);
                        }
                    }
                }
            }
        }
    }
}

/// `A^{ij} D_i D_j v` at interior nodes, for a full-node spatial vector `v`.
fn apply_operator(coeffs: &SystemCoefficients, piece: usize, grid: &GridSpec, it: &Interior, v: &[f64]) -> Vec<f64> {
    let d1 = coeffs.d1;
    let mut out = vec![0.0; it.len() * d1];
    for (row, &node) in it.nodes.iter().enumerate() {
        stencil(coeffs, piece, grid, it, node, |nb, k, r, w| out[row * d1 + k] += w * v[nb * d1 + r]);
    }
    out
}

/// Sparse `I·diag − scale·L` on the interior unknowns.
struct Factored {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    triplets: Vec<(usize, usize, f64)>,
}

fn factor(coeffs: &SystemCoefficients, piece: usize, grid: &GridSpec, it: &Interior, diag: f64, scale: f64) -> Result<Factored> {
    let d1 = coeffs.d1;
    let n = it.len() * d1;
    let mut trips = Vec::new();
    for (row, &node) in it.nodes.iter().enumerate() {
        for k in 0..d1 {
            if diag != 0.0 {
                trips.push((row * d1 + k, row * d1 + k, diag));
            }
        }
        stencil(coeffs, piece, grid, it, node, |nb, k, r, w| {
            if let Some(col) = it.index[nb] {
                trips.push((row * d1 + k, col * d1 + r, -scale * w));
            }
        });
    }
    let entries: Vec<Triplet<usize, usize, f64>> = trips.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| Error::Solve(format!("assembly of a {n} x {n} system failed: {e:?}")))?;
    let lu = m.sp_lu().map_err(|e| Error::Solve(format!("sparse LU of a {n} x {n} system failed: {e:?}")))?;
    Ok(Factored { lu, triplets: trips })
}

impl Factored {
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let rhs = faer::Col::<f64>::from_fn(n, |i| b[i]);
        let x = self.lu.solve(&rhs);
        let x: Vec<f64> = (0..n).map(|i| x[i]).collect();
        let mut ax = vec![0.0; n];
        for &(r, c, v) in &self.triplets {
            ax[r] += v * x[c];
        }
        let res = ax.iter().zip(b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !res.is_finite() || res > 1e-8 * scale.max(f64::MIN_POSITIVE) && res > 1e-300 {
            return Err(Error::Solve(format!("linear residual {res:e} against right-hand side norm {scale:e}")));
        }
        Ok(x)
    }
}

fn check_forcing(f: &NodeField, grid: &GridSpec, d1: usize) -> Result<()> {
    if f.grid() != grid {
        return Err(Error::Grid("forcing is not sampled on the solver grid".into()));
    }
    if f.d1() != d1 {
        return Err(Error::Dimension(format!("forcing has {} components, system has {d1}", f.d1())));
    }
    Ok(())
}

type Boundary<'a> = &'a dyn Fn(f64, &[f64]) -> Vec<f64>;

/// Forward march of `u_s = A(τ(s)) D²u + f` on `grid`, starting from
/// `initial` (a full spatial vector) with value data `boundary(s, x)` on the
/// faces.
fn march(
    coeffs: &SystemCoefficients,
    grid: &GridSpec,
    scheme: Scheme,
    forcing: Option<&NodeField>,
    initial: Option<&[f64]>,
    boundary: Option<Boundary<'_>>,
    coefficient_time: &dyn Fn(f64) -> f64,
) -> Result<NodeField> {
    validate_ellipticity(coeffs, ELLIPTICITY_SAMPLES)?;
    if grid.d() != coeffs.d {
        return Err(Error::Dimension(format!("grid has d = {}, coefficients d = {}", grid.d(), coeffs.d)));
    }
    let d1 = coeffs.d1;
    let space = grid.spatial_part();
    let it = Interior::new(&space)?;
    let m = space.n_spatial_nodes() * d1;
    let ht = grid.ht();
    let boundary_vector = |s: f64| -> Vec<f64> {
        let mut v = vec![0.0; m];
        if let Some(b) = boundary {
            let mut x = vec![0.0; space.d()];
            crate::dyadic::for_each_index(&it.shape, |node, idx| {
                if it.index[node].is_none() {
                    for k in 0..x.len() {
                        x[k] = space.coord(k, idx[k]);
                    }
                    v[node * d1..(node + 1) * d1].copy_from_slice(&b(s, &x));
                }
            });
        }
        v
    };
    let forcing_at = |step: usize| -> Option<&[f64]> { forcing.map(|f| &f.values()[step * m..(step + 1) * m]) };

    let mut current = match initial {
        Some(v) => v.to_vec(),
        None => boundary_vector(grid.t0),
    };
    let mut slices = Vec::with_capacity(grid.nt + 1);
    slices.extend_from_slice(&current);
    let (diag_scale, explicit) = match scheme {
        Scheme::ImplicitEuler => (ht, 0.0),
        Scheme::CrankNicolson => (ht / 2.0, ht / 2.0),
    };
    let mut cache: HashMap<usize, Factored> = HashMap::new();
    for step in 1..=grid.nt {
        let s_new = grid.time(step);
        let piece = coeffs.piece_at(coefficient_time((grid.time(step - 1) + s_new) / 2.0));
        if !cache.contains_key(&piece) {
            cache.insert(piece, factor(coeffs, piece, &space, &it, 1.0, diag_scale)?);
        }
        let next_boundary = boundary_vector(s_new);
        let lb = apply_operator(coeffs, piece, &space, &it, &next_boundary);
        let explicit_part = if explicit > 0.0 { apply_operator(coeffs, piece, &space, &it, &current) } else { Vec::new() };
        let mut rhs = vec![0.0; it.len() * d1];
        for (row, &node) in it.nodes.iter().enumerate() {
            for k in 0..d1 {
                let q = row * d1 + k;
                let mut b = current[node * d1 + k] + diag_scale * lb[q];
                if explicit > 0.0 {
                    b += explicit * explicit_part[q];
                }
                match scheme {
                    Scheme::ImplicitEuler => {
                        if let Some(f) = forcing_at(step) {
                            b += ht * f[node * d1 + k];
                        }
                    }
                    Scheme::CrankNicolson => {
                        if let (Some(f0), Some(f1)) = (forcing_at(step - 1), forcing_at(step)) {
                            b += ht / 2.0 * (f0[node * d1 + k] + f1[node * d1 + k]);
                        }
                    }
                }
                rhs[q] = b;
            }
        }
        let x = cache[&piece].solve(&rhs)?;
        current = next_boundary;
        for (row, &node) in it.nodes.iter().enumerate() {
            current[node * d1..(node + 1) * d1].copy_from_slice(&x[row * d1..(row + 1) * d1]);
        }
        slices.extend_from_slice(&current);
    }
    NodeField::from_values(grid.clone(), d1, slices)
}

/// Solves `u_t = A^{ij}(t) u_{x^i x^j} + f` with `u(0) = 0` and zero values
/// on every face. `f` is sampled on `config.grid()`.
pub fn solve_parabolic(coeffs: &SystemCoefficients, f: &NodeField, config: &SolverConfig) -> Result<NodeField> {
    let grid = config.grid()?;
    check_forcing(f, &grid, coeffs.d1)?;
    let u = march(coeffs, &grid, config.scheme, Some(f), None, None, &|t| t)?;
    log::debug!("parabolic residual {:e}", parabolic_residual(coeffs, &u, f, config.scheme)?);
    Ok(u)
}

/// Solves `A^{ij} u_{x^i x^j} = f` with zero values on every face.
pub fn solve_elliptic(coeffs: &SystemCoefficients, f: &NodeField, config: &SolverConfig) -> Result<NodeField> {
    if coeffs.n_pieces() != 1 {
        return Err(Error::Config("elliptic problems need time-independent coefficients".into()));
    }
    validate_ellipticity(coeffs, ELLIPTICITY_SAMPLES)?;
    let grid = config.spatial_grid()?;
    check_forcing(f, &grid, coeffs.d1)?;
    let d1 = coeffs.d1;
    let it = Interior::new(&grid)?;
    let fac = factor(coeffs, 0, &grid, &it, 0.0, -1.0)?;
    let rhs: Vec<f64> =
        it.nodes.iter().flat_map(|&node| (0..d1).map(move |k| f.values()[node * d1 + k])).collect();
    let x = fac.solve(&rhs)?;
    let mut values = vec![0.0; f.values().len()];
    for (row, &node) in it.nodes.iter().enumerate() {
        values[node * d1..(node + 1) * d1].copy_from_slice(&x[row * d1..(row + 1) * d1]);
    }
    NodeField::from_values(grid, d1, values)
}

/// Largest interior residual of the time-stepping equations,
/// `(uⁿ − uⁿ⁻¹)/Δt − L uⁿ − fⁿ` for implicit Euler and its trapezoidal
/// counterpart for Crank–Nicolson.
pub fn parabolic_residual(coeffs: &SystemCoefficients, u: &NodeField, f: &NodeField, scheme: Scheme) -> Result<f64> {
    check_forcing(f, u.grid(), coeffs.d1)?;
    let grid = u.grid();
    let space = grid.spatial_part();
    let it = Interior::new(&space)?;
    let d1 = coeffs.d1;
    let m = space.n_spatial_nodes() * d1;
    let ht = grid.ht();
    let mut worst: f64 = 0.0;
    for step in 1..=grid.nt {
        let piece = coeffs.piece_at((grid.time(step - 1) + grid.time(step)) / 2.0);
        let prev = &u.values()[(step - 1) * m..step * m];
        let next = &u.values()[step * m..(step + 1) * m];
        let l_next = apply_operator(coeffs, piece, &space, &it, next);
        let l_prev = apply_operator(coeffs, piece, &space, &it, prev);
        let f_prev = &f.values()[(step - 1) * m..step * m];
        let f_next = &f.values()[step * m..(step + 1) * m];
        for (row, &node) in it.nodes.iter().enumerate() {
            for k in 0..d1 {
                let q = node * d1 + k;
                let dt = (next[q] - prev[q]) / ht;
                let rhs = match scheme {
                    Scheme::ImplicitEuler => l_next[row * d1 + k] + f_next[q],
                    Scheme::CrankNicolson => {
                        0.5 * (l_next[row * d1 + k] + l_prev[row * d1 + k]) + 0.5 * (f_next[q] + f_prev[q])
                    }
                };
                worst = worst.max((dt - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest interior value of `|A^{ij} D_i D_j u − f|`.
pub fn elliptic_residual(coeffs: &SystemCoefficients, u: &NodeField, f: &NodeField) -> Result<f64> {
    check_forcing(f, u.grid(), coeffs.d1)?;
    let it = Interior::new(u.grid())?;
    let d1 = coeffs.d1;
    let lu = apply_operator(coeffs, 0, u.grid(), &it, u.values());
    let mut worst: f64 = 0.0;
    for (row, &node) in it.nodes.iter().enumerate() {
        for k in 0..d1 {
            worst = worst.max((lu[row * d1 + k] - f.values()[node * d1 + k]).abs());
        }
    }
    Ok(worst)
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den == 0.0 {
        return if num == 0.0 { Ok(0.0) } else { Err(Error::ZeroDenominator(num)) };
    }
    Ok(num / den)
}

/// `(‖M^{−1}u‖ + ‖u_x‖ + ‖Mu_xx‖ + ‖Mu_t‖) / ‖Mf‖`, every norm in
/// `L_p((0,T); L_{p,θ})`. Zero data give 0.
pub fn apriori_ratio_parabolic(u: &NodeField, f: &NodeField, spec: &NormSpec) -> Result<f64> {
    let (p, theta) = (spec.p, spec.theta);
    let q = 1.0 / p;
    let num = derivative_term(u, 0, 0, -1, p, theta)?.powf(q)
        + derivative_term(u, 1, 0, 0, p, theta)?.powf(q)
        + derivative_term(u, 2, 0, 1, p, theta)?.powf(q)
        + derivative_term(u, 0, 1, 1, p, theta)?.powf(q);
    let den = derivative_term(f, 0, 0, 1, p, theta)?.powf(q);
    ratio(num, den)
}

/// `(‖M^{−1}u‖ + ‖u_x‖ + ‖Mu_xx‖) / ‖Mf‖` in `L_{p,θ}`.
pub fn apriori_ratio_elliptic(u: &NodeField, f: &NodeField, spec: &NormSpec) -> Result<f64> {
    let (a, b, c) = crate::sobolev::equiv_triple(u, spec)?;
    let den = derivative_term(f, 0, 0, 1, spec.p, spec.theta)?.powf(1.0 / spec.p);
    ratio(a + b + c, den)
}

/// `Q_{λr}(t₀, a, x₀') ∩ Ω = (t₀, t₀ + (λr)²) × (max(0, a − λr), a + λr) × ∏(x₀'ᵏ − λr, x₀'ᵏ + λr)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBox {
    pub t0: f64,
    pub a: f64,
    pub x0: Vec<f64>,
    pub r: f64,
    pub lambda: f64,
}

impl LocalBox {
    pub fn radius(&self) -> f64 {
        self.lambda * self.r
    }

    /// Grid on the box with `n1` intervals in `x¹`, `n_trans` in the other
    /// directions and `nt` in time.
    pub fn grid(&self, n1: usize, n_trans: usize, nt: usize) -> Result<GridSpec> {
        let big = self.radius();
        let lo1 = (self.a - big).max(0.0);
        let mut x_lo = vec![lo1];
        let mut x_len = vec![self.a + big - lo1];
        let mut nx = vec![n1];
        for c in &self.x0 {
            x_lo.push(c - big);
            x_len.push(2.0 * big);
            nx.push(n_trans);
        }
        GridSpec::new(self.t0, big * big, nt, x_lo, x_len, nx)
    }
}

/// Discrete solution of the backward system `u_t + A^{ij}(t) u_{x^i x^j} = 0`
/// on `grid` with terminal values `terminal(x)` and lateral values
/// `lateral(t, x)`. The march runs in reversed time `s = t_end − t`.
pub fn homogeneous_local_solve(
    coeffs: &SystemCoefficients,
    grid: &GridSpec,
    terminal: &dyn Fn(&[f64]) -> Vec<f64>,
    lateral: &dyn Fn(f64, &[f64]) -> Vec<f64>,
    scheme: Scheme,
) -> Result<NodeField> {
    if grid.nt == 0 {
        return Err(Error::Grid("local solve needs a time axis".into()));
    }
    let d1 = coeffs.d1;
    let t_end = grid.t0 + grid.t_len;
    let space = grid.spatial_part();
    let it = Interior::new(&space)?;
    let mut init = vec![0.0; space.n_spatial_nodes() * d1];
    let mut x = vec![0.0; space.d()];
    let mut mismatch: f64 = 0.0;
    let mut scale: f64 = 0.0;
    crate::dyadic::for_each_index(&it.shape, |node, idx| {
        for k in 0..x.len() {
            x[k] = space.coord(k, idx[k]);
        }
        let v = terminal(&x);
        if it.index[node].is_none() {
            let w = lateral(t_end, &x);
            for c in 0..d1 {
                mismatch = mismatch.max((v[c] - w[c]).abs());
                scale = scale.max(v[c].abs());
            }
        }
        init[node * d1..(node + 1) * d1].copy_from_slice(&v);
    });
    if mismatch > 1e-9 * scale.max(1.0) {
        return Err(Error::Domain(format!("terminal and lateral data disagree at corners by {mismatch:e}")));
    }
    let mut reversed = grid.clone();
    reversed.t0 = 0.0;
    let bdry = |s: f64, x: &[f64]| lateral(t_end - s, x);
    let v = march(coeffs, &reversed, scheme, None, Some(&init), Some(&bdry), &|s| t_end - s)?;
    let slices: Vec<NodeField> = (0..=grid.nt).rev().map(|k| v.time_slice(k)).collect();
    NodeField::from_slices(&slices, grid.t0, grid.t_len)
}

/// Largest interior residual of `u_t + A^{ij} D_i D_j u = 0` for the
/// backward implicit Euler step.
pub fn backward_residual(coeffs: &SystemCoefficients, u: &NodeField) -> Result<f64> {
    let grid = u.grid();
    let space = grid.spatial_part();
    let it = Interior::new(&space)?;
    let d1 = coeffs.d1;
    let m = space.n_spatial_nodes() * d1;
    let mut worst: f64 = 0.0;
    for step in 0..grid.nt {
        let piece = coeffs.piece_at((grid.time(step) + grid.time(step + 1)) / 2.0);
        let now = &u.values()[step * m..(step + 1) * m];
        let later = &u.values()[(step + 1) * m..(step + 2) * m];
        let l_now = apply_operator(coeffs, piece, &space, &it, now);
        for (row, &node) in it.nodes.iter().enumerate() {
            for k in 0..d1 {
                let q = node * d1 + k;
                let dt = (later[q] - now[q]) / grid.ht();
                worst = worst.max((dt + l_now[row * d1 + k]).abs());
            }
        }
    }
    Ok(worst)
}
