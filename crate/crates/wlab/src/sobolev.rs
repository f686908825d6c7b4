//! Weighted Sobolev norms at integer smoothness, the weighted Poincaré
//! inequality, the normalized bump `ζ` and Hölder quotients.
//!
//! Norms are computed by cell quadrature: the weight `(x¹)^{θ−d}` is
//! integrated exactly over every cell and `|·|^p` enters through the mean of
//! its node values. On a grid with a time axis the same rule integrates in
//! `t` as well, which gives the `L_p`-in-time aggregate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridSpec, NodeField};
use crate::measure::{weight_between, WeightParams};

/// Exponent `p`, weight parameter `θ`, smoothness `γ` and the power of `M`
/// applied before taking the norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub theta: f64,
    pub gamma: u8,
    pub m_power: i32,
}

impl NormSpec {
    pub fn new(p: f64, theta: f64, gamma: u8, m_power: i32) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!("norm needs p > 1 and finite theta, got p = {p}, theta = {theta}")));
        }
        if gamma > 2 {
            return Err(Error::Domain(format!("gamma must be 0, 1 or 2, got {gamma}")));
        }
        Ok(Self { p, theta, gamma, m_power })
    }

    /// Plain weighted `L_p` norm.
    pub fn lp(p: f64, theta: f64) -> Result<Self> {
        Self::new(p, theta, 0, 0)
    }

    /// Whether `θ` lies in the range where the solvability estimates hold:
    /// `(d+1−p, d+p−1)` for `p ≤ 2` and `(d−1, d+1)` for `p > 2`.
    pub fn admissible(&self, d: usize) -> bool {
        let d = d as f64;
        let (lo, hi) = if self.p <= 2.0 { (d + 1.0 - self.p, d + self.p - 1.0) } else { (d - 1.0, d + 1.0) };
        lo < self.theta && self.theta < hi
    }
}

/// `∫_lo^hi x^e dx` for any real `e`; infinite when the integral diverges at 0.
fn power_integral(lo: f64, hi: f64, e: f64) -> f64 {
    if e > -1.0 {
        return weight_between(lo, hi, WeightParams::new(e).expect("e > -1"));
    }
    if lo <= 0.0 {
        return f64::INFINITY;
    }
    if e == -1.0 {
        (hi / lo).ln()
    } else {
        (hi.powf(e + 1.0) - lo.powf(e + 1.0)) / (e + 1.0)
    }
}

/// Per-axis node weights of the cell rule, time axis first. Each node gets
/// half of the weight of every adjacent cell; the `x¹` axis carries
/// `(x¹)^e`.
fn nodal_weights(grid: &GridSpec, e: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.d() + 1);
    let spread = |cells: Vec<f64>| {
        let mut w = vec![0.0; cells.len() + 1];
        for (i, c) in cells.iter().enumerate() {
            w[i] += c / 2.0;
            w[i + 1] += c / 2.0;
        }
        w
    };
    out.push(if grid.nt == 0 { vec![1.0] } else { spread(vec![grid.ht(); grid.nt]) });
    for k in 0..grid.d() {
        let cells = (0..grid.nx[k])
            .map(|i| {
                let (lo, hi) = (grid.coord(k, i), grid.coord(k, i + 1));
                if k == 0 {
                    power_integral(lo, hi, e)
                } else {
                    hi - lo
                }
            })
            .collect();
        out.push(spread(cells));
    }
    out
}

/// `∫ g (x¹)^e dx (dt)` for a per-node density `g` under the cell rule.
pub fn integrate(grid: &GridSpec, e: f64, g: &[f64]) -> f64 {
    let w = nodal_weights(grid, e);
    let mut total = 0.0;
    crate::dyadic::for_each_index(&grid.shape(), |flat, idx| {
        if g[flat] == 0.0 {
            return;
        }
        let mut weight = 1.0;
        for (a, i) in idx.iter().enumerate() {
            weight *= w[a][*i];
        }
        total += g[flat] * weight;
    });
    total
}

/// `M^m u`, with `M^{−1}u` at `x¹ = 0` taken as the one-sided limit `D₁u`.
pub fn apply_m(u: &NodeField, m: i32) -> Result<NodeField> {
    if m == 0 {
        return Ok(u.clone());
    }
    let grid = u.grid();
    let touches_zero = grid.x_lo[0] == 0.0;
    if m < -1 && touches_zero {
        return Err(Error::Domain(format!("M^{m} is singular on x1 = 0")));
    }
    let mut out = u.multiply_by(|_, x| if x[0] == 0.0 { 0.0 } else { x[0].powi(m) });
    if m == -1 && touches_zero {
        let mut beta = vec![0; u.d()];
        beta[0] = 1;
        let du = u.derivative(&beta, 0)?;
        let d1 = u.d1();
        let n1 = grid.nx[0] + 1;
        let inner: usize = grid.nx[1..].iter().map(|n| n + 1).product();
        for (flat, v) in out.values_mut().chunks_mut(d1).enumerate() {
            if (flat / inner) % n1 == 0 {
                v.copy_from_slice(&du.values()[flat * d1..(flat + 1) * d1]);
            }
        }
    }
    Ok(out)
}

fn multi_indices(d: usize, order: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(d - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `Σ_{|β| = order} ∫ |M^m ∂_t^{time_order} D^β u|^p (x¹)^{θ−d}`, the `p`-th
/// power of one term of the integer-smoothness norm.
pub fn derivative_term(u: &NodeField, order: usize, time_order: usize, m: i32, p: f64, theta: f64) -> Result<f64> {
    let d = u.d();
    let e = theta - d as f64;
    let mut density = vec![0.0; u.values().len() / u.d1()];
    for beta in multi_indices(d, order) {
        let du = if order == 0 && time_order == 0 { u.clone() } else { u.derivative(&beta, time_order)? };
        let v = apply_m(&du, m)?;
        for (k, chunk) in v.values().chunks(u.d1()).enumerate() {
            density[k] += chunk.iter().map(|c| c.abs().powf(p)).sum::<f64>();
        }
    }
    Ok(integrate(u.grid(), e, &density))
}

/// `‖M^m u‖_{L_{p,θ}}`, summed over components.
pub fn weighted_lp_norm(u: &NodeField, spec: &NormSpec) -> Result<f64> {
    Ok(derivative_term(u, 0, 0, spec.m_power, spec.p, spec.theta)?.powf(1.0 / spec.p))
}

/// `(Σ_{|β| ≤ γ} ∫ |(x¹)^{|β|} D^β (M^m u)|^p (x¹)^{θ−d} dx)^{1/p}`.
pub fn sobolev_norm_integer(u: &NodeField, spec: &NormSpec) -> Result<f64> {
    let v = apply_m(u, spec.m_power)?;
    let mut total = 0.0;
    for k in 0..=spec.gamma as usize {
        total += derivative_term(&v, k, 0, k as i32, spec.p, spec.theta)?;
    }
    Ok(total.powf(1.0 / spec.p))
}

/// `(‖M^{−1}w‖, ‖w_x‖, ‖M w_xx‖)` in `L_{p,θ}`.
pub fn equiv_triple(w: &NodeField, spec: &NormSpec) -> Result<(f64, f64, f64)> {
    let q = 1.0 / spec.p;
    Ok((
        derivative_term(w, 0, 0, -1, spec.p, spec.theta)?.powf(q),
        derivative_term(w, 1, 0, 0, spec.p, spec.theta)?.powf(q),
        derivative_term(w, 2, 0, 1, spec.p, spec.theta)?.powf(q),
    ))
}

/// Both sides of the weighted Poincaré inequality on
/// `D_r(a) = (a−r, a+r) × [−r, r]^{d−1}`: the double integral
/// `∬ |u(x) − u(y)|^p ν_α(dx) ν_α(dy)` and `2^{α+2}(2r)^p ν_α(D_r(a)) ∫ |u_x|^p ν_α`.
///
/// `u` must be sampled on exactly that box. The double integral pairs cell
/// means of `u`.
pub fn poincare_check(u: &NodeField, r: f64, a: f64, p: f64, alpha: f64) -> Result<(f64, f64)> {
    if alpha < 0.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !(r > 0.0) || a < r || !(p >= 1.0) {
        return Err(Error::Domain(format!("need 0 < r <= a and p >= 1, got r = {r}, a = {a}, p = {p}")));
    }
    let g = u.grid();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
    let fits = g.nt == 0
        && close(g.x_lo[0], a - r)
        && close(g.x_len[0], 2.0 * r)
        && (1..g.d()).all(|k| close(g.x_lo[k], -r) && close(g.x_len[k], 2.0 * r));
    if !fits {
        return Err(Error::Grid("field is not sampled on D_r(a)".into()));
    }
    let params = WeightParams::new(alpha)?;
    let d = g.d();
    let d1 = u.d1();

    // Cell masses and cell means.
    let cells: Vec<usize> = g.nx.clone();
    let ncell: usize = cells.iter().product();
    let mut mass = vec![0.0; ncell];
    let mut mean = vec![0.0; ncell * d1];
    let node_strides = crate::dyadic::strides(&g.spatial_shape());
    let corners = vec![2usize; d];
    let ncorner = 1usize << d;
    crate::dyadic::for_each_index(&cells, |c, idx| {
        let mut m = weight_between(g.coord(0, idx[0]), g.coord(0, idx[0] + 1), params);
        for k in 1..d {
            m *= g.h(k);
        }
        mass[c] = m;
        crate::dyadic::for_each_index(&corners, |_, off| {
            let node: usize = (0..d).map(|k| (idx[k] + off[k]) * node_strides[k]).sum();
            for comp in 0..d1 {
                mean[c * d1 + comp] += u.values()[node * d1 + comp] / ncorner as f64;
            }
        });
    });
    let mut lhs = 0.0;
    for i in 0..ncell {
        let mut row = 0.0;
        for j in 0..ncell {
            let diff2: f64 = (0..d1).map(|c| (mean[i * d1 + c] - mean[j * d1 + c]).powi(2)).sum();
            if diff2 > 0.0 {
                row += mass[j] * diff2.powf(p / 2.0);
            }
        }
        lhs += mass[i] * row;
    }

    // |u_x|^p with the Euclidean norm over directions and components.
    let mut grad2 = vec![0.0; g.n_spatial_nodes()];
    for k in 0..d {
        let mut beta = vec![0; d];
        beta[k] = 1;
        let du = u.derivative(&beta, 0)?;
        for (n, chunk) in du.values().chunks(d1).enumerate() {
            grad2[n] += chunk.iter().map(|v| v * v).sum::<f64>();
        }
    }
    let density: Vec<f64> = grad2.iter().map(|s| s.powf(p / 2.0)).collect();
    let rhs = integrate(g, alpha, &density);
    let volume = mass.iter().sum::<f64>();
    let bound = 2f64.powf(alpha + 2.0) * (2.0 * r).powf(p) * volume * rhs;
    Ok((lhs, bound))
}

/// Normalization of `ψ(s) = C exp(−1/(1 − 4s²))` on `(−1/2, 1/2)`.
const PSI_NORM: f64 = 4.504_567_242_087_162;

/// `ψ` and `ψ'`.
fn psi(s: f64) -> (f64, f64) {
    let q = 1.0 - 4.0 * s * s;
    if q <= 0.0 {
        return (0.0, 0.0);
    }
    let v = PSI_NORM * (-1.0 / q).exp();
    (v, v * (-8.0 * s / (q * q)))
}

/// Calibrated `N(α)`: 1.1 times the largest measured value of both
/// normalized quantities over `r/a ∈ (0, 1]` at these knots. Between knots
/// the larger neighbour is used.
const BUMP_CONSTANTS: [(f64, f64); 18] = [
    (-0.95, 215.0),
    (-0.9, 110.0),
    (-0.75, 46.6),
    (-0.5, 25.8),
    (-0.25, 19.1),
    (0.0, 15.9),
    (0.5, 18.2),
    (1.0, 23.8),
    (1.5, 33.3),
    (2.0, 49.0),
    (2.5, 74.6),
    (3.0, 116.3),
    (3.5, 185.2),
    (4.0, 299.6),
    (4.5, 491.2),
    (5.0, 814.5),
    (5.5, 1363.6),
    (6.0, 2302.4),
];

/// The frozen constant `N(α)` for [`bump_zeta`], defined for `α ∈ [−0.95, 6]`.
pub fn bump_constant(alpha: f64) -> Result<f64> {
    let first = BUMP_CONSTANTS[0].0;
    let last = BUMP_CONSTANTS[BUMP_CONSTANTS.len() - 1].0;
    if !(first..=last).contains(&alpha) {
        return Err(Error::Domain(format!("no calibrated bump constant for alpha = {alpha}")));
    }
    let k = BUMP_CONSTANTS.iter().position(|(a, _)| *a >= alpha).expect("alpha within table");
    if BUMP_CONSTANTS[k].0 == alpha || k == 0 {
        return Ok(BUMP_CONSTANTS[k].1);
    }
    Ok(BUMP_CONSTANTS[k].1.max(BUMP_CONSTANTS[k - 1].1))
}

/// `ζ(x) = x^{−α} ψ((x − a)/r) / r`, supported in `B_{r/2}(a)` with unit
/// `ν_α` integral.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub a: f64,
    pub r: f64,
    pub alpha: f64,
    /// Sampled `sup ζ · ν_α(B_r(a))`.
    pub sup_scaled: f64,
    /// Sampled `sup |ζ'| · ν_α(B_r(a)) · r`.
    pub grad_scaled: f64,
    /// The frozen `N(α)` both quantities are certified against.
    pub constant: f64,
}

impl Bump {
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        psi((x - self.a) / self.r).0 * x.powf(-self.alpha) / self.r
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (v, dv) = psi((x - self.a) / self.r);
        let w = x.powf(-self.alpha);
        (-self.alpha * w / x * v + w * dv / self.r) / self.r
    }
}

/// Builds the bump on `B_r(a)` and certifies both scaled suprema against
/// [`bump_constant`]. Suprema are sampled on 40 001 points of the support.
pub fn bump_zeta(a: f64, r: f64, alpha: f64) -> Result<Bump> {
    if !(r > 0.0) || r > a || !a.is_finite() {
        return Err(Error::Domain(format!("bump needs 0 < r <= a, got r = {r}, a = {a}")));
    }
    let params = WeightParams::new(alpha)?;
    let constant = bump_constant(alpha)?;
    let mass = weight_between(a - r, a + r, params);
    let mut bump = Bump { a, r, alpha, sup_scaled: 0.0, grad_scaled: 0.0, constant };
    let n = 40_000;
    for k in 1..n {
        let x = a - r / 2.0 + r * k as f64 / n as f64;
        bump.sup_scaled = bump.sup_scaled.max(bump.value(x) * mass);
        bump.grad_scaled = bump.grad_scaled.max(bump.derivative(x).abs() * mass * r);
    }
    if bump.sup_scaled > constant || bump.grad_scaled > constant {
        return Err(Error::Domain(format!(
            "bump constants {} and {} exceed N({alpha}) = {constant}",
            bump.sup_scaled, bump.grad_scaled
        )));
    }
    Ok(bump)
}

/// Discrete Hölder quotients of a trajectory:
/// `sup |u(t,x) − u(t,y)| / |x − y|^κ` and `sup |u(t,x) − u(s,x)| / |t − s|^{κ/2}`
/// over node pairs. Requires `0 < κ < 1 − 2/p − d/p`.
pub fn holder_quotients(u: &NodeField, kappa: f64, p: f64) -> Result<(f64, f64)> {
    let g = u.grid();
    let d = g.d();
    let kappa0 = 1.0 - 2.0 / p - d as f64 / p;
    if !(kappa0 > 0.0) {
        return Err(Error::Domain(format!("no Hölder range: 1 - 2/p - d/p = {kappa0}")));
    }
    if !(kappa > 0.0 && kappa < kappa0) {
        return Err(Error::Domain(format!("kappa = {kappa} outside (0, {kappa0})")));
    }
    let d1 = u.d1();
    let n = g.n_spatial_nodes();
    let coords: Vec<Vec<f64>> = {
        let mut out = Vec::with_capacity(n);
        crate::dyadic::for_each_index(&g.spatial_shape(), |_, idx| {
            out.push((0..d).map(|k| g.coord(k, idx[k])).collect());
        });
        out
    };
    let vals = u.values();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut space: f64 = 0.0;
    for k in 0..=g.nt {
        let slice = &vals[k * n * d1..(k + 1) * n * d1];
        for i in 0..n {
            for j in i + 1..n {
                let diff = dist(&slice[i * d1..(i + 1) * d1], &slice[j * d1..(j + 1) * d1]);
                if diff > 0.0 {
                    space = space.max(diff / dist(&coords[i], &coords[j]).powf(kappa));
                }
            }
        }
    }
    let mut time: f64 = 0.0;
    for x in 0..n {
        for k in 0..=g.nt {
            for l in k + 1..=g.nt {
                let a = &vals[(k * n + x) * d1..(k * n + x + 1) * d1];
                let b = &vals[(l * n + x) * d1..(l * n + x + 1) * d1];
                let diff = dist(a, b);
                if diff > 0.0 {
                    time = time.max(diff / (g.time(l) - g.time(k)).powf(kappa / 2.0));
                }
            }
        }
    }
    Ok((space, time))
}

#[cfg(test)]
mod tests;
