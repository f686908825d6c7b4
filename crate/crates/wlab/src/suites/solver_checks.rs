use std::f64::consts::PI;

use super::Part;
use crate::error::{Error, Result};
use crate::experiments::heat_forcing;
use crate::fields::NodeField;
use crate::report::{BoundSource, Case};
use crate::sobolev::{holder_quotients, weighted_lp_norm, NormSpec};
use crate::solver::{
    apriori_ratio_elliptic, apriori_ratio_parabolic, elliptic_residual, parabolic_residual, solve_elliptic,
    solve_parabolic, NestedMatrices, Scheme, SolverConfig, SystemCoefficients,
};

const GRIDS: [usize; 3] = [16, 32, 64];
const ORDER: f64 = 1.8;

fn scalar(a: f64) -> Result<SystemCoefficients> {
    SystemCoefficients::constant(&vec![vec![vec![vec![a]]]])
}

fn coupled() -> Result<SystemCoefficients> {
    SystemCoefficients::constant(&vec![vec![vec![vec![1.0, 0.2], vec![0.0, 1.0]]]])
}

fn unit_config(n: usize, nt: usize, scheme: Scheme) -> SolverConfig {
    SolverConfig { l: 1.0, widths: vec![], n1: n, n_trans: vec![], t_final: 0.5, nt, scheme, p: 2.0, theta: 1.0 }
}

fn l2_error(u: &NodeField, exact: &NodeField) -> Result<f64> {
    let e = u.zip_with(exact, |a, b| a - b)?;
    weighted_lp_norm(&e, &NormSpec::lp(2.0, e.d() as f64)?)
}

/// Smallest observed order over successive grid doublings.
fn observed_order(errors: &[f64]) -> f64 {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min)
}

fn order_case(part: &mut Part, name: &str, grids: &[usize], errors: &[f64]) {
    for (n, e) in grids.iter().zip(errors) {
        part.point(name, *n as f64, *e);
    }
    part.push(
        Case::at_least(name, observed_order(errors), ORDER, 0.0, 0.0, BoundSource::Measured)
            .param("grids", grids.to_vec())
            .param("errors", errors.to_vec()),
    );
}

/// Spatial L² order of Crank–Nicolson on a scalar and a coupled manufactured
/// solution, errors taken at the final time.
pub fn convergence_parabolic() -> Result<Part> {
    let mut part = Part::default();
    let mut scalar_err = Vec::new();
    let mut coupled_err = Vec::new();
    for n in GRIDS {
        let cfg = unit_config(n, n, Scheme::CrankNicolson);
        let grid = cfg.grid()?;
        // u* = (e^{−t} − e^{−π²t}) sin πx.
        let f = NodeField::sample(grid.clone(), 1, |t, x| vec![(PI * PI - 1.0) * (-t).exp() * (PI * x[0]).sin()])?;
        let u = solve_parabolic(&scalar(1.0)?, &f, &cfg)?;
        let want = NodeField::sample(grid.clone(), 1, |t, x| vec![((-t).exp() - (-PI * PI * t).exp()) * (PI * x[0]).sin()])?;
        scalar_err.push(l2_error(&u.time_slice(n), &want.time_slice(n))?);

        // u* = (t sin πx, t² sin 2πx).
        let f = NodeField::sample(grid.clone(), 2, |t, x| {
            let (s1, s2) = ((PI * x[0]).sin(), (2.0 * PI * x[0]).sin());
            let u1_xx = -PI * PI * t * s1;
            let u2_xx = -4.0 * PI * PI * t * t * s2;
            vec![s1 - u1_xx - 0.2 * u2_xx, 2.0 * t * s2 - u2_xx]
        })?;
        let u = solve_parabolic(&coupled()?, &f, &cfg)?;
        let want = NodeField::sample(grid.clone(), 2, |t, x| vec![t * (PI * x[0]).sin(), t * t * (2.0 * PI * x[0]).sin()])?;
        coupled_err.push(l2_error(&u.time_slice(n), &want.time_slice(n))?);
        part.consume("solver-unknowns", (3 * (n + 1) * (n + 1)) as f64);
    }
    part.resolution("parabolic-grids", GRIDS.to_vec());
    order_case(&mut part, "convergence/parabolic/scalar", &GRIDS, &scalar_err);
    order_case(&mut part, "convergence/parabolic/coupled", &GRIDS, &coupled_err);
    Ok(part)
}

/// Spatial L² order of the elliptic solver: a scalar problem on a line and a
/// coupled system with mixed coefficients on a rectangle.
pub fn convergence_elliptic() -> Result<Part> {
    let mut part = Part::default();
    let mut errors = Vec::new();
    for n in GRIDS {
        let cfg = unit_config(n, 0, Scheme::ImplicitEuler);
        let grid = cfg.spatial_grid()?;
        let f = NodeField::sample(grid.clone(), 1, |_, x| vec![-PI * PI * (PI * x[0]).sin()])?;
        let u = solve_elliptic(&scalar(1.0)?, &f, &cfg)?;
        let want = NodeField::sample(grid, 1, |_, x| vec![(PI * x[0]).sin()])?;
        errors.push(l2_error(&u, &want)?);
        part.consume("solver-unknowns", (n + 1) as f64);
    }
    order_case(&mut part, "convergence/elliptic/scalar", &GRIDS, &errors);

    let a: NestedMatrices = vec![
        vec![vec![vec![1.0, 0.2], vec![0.0, 1.0]], vec![vec![0.3, 0.0], vec![0.0, 0.3]]],
        vec![vec![vec![0.3, 0.0], vec![0.0, 0.3]], vec![vec![1.0, 0.0], vec![0.1, 2.0]]],
    ];
    let c = SystemCoefficients::constant(&a)?;
    let grids = [8, 16, 32];
    let mut errors = Vec::new();
    for n in grids {
        let cfg = SolverConfig { widths: vec![1.0], n_trans: vec![n], ..unit_config(n, 0, Scheme::ImplicitEuler) };
        let grid = cfg.spatial_grid()?;
        // u¹ = u² = sin(πx)·sin(π(y+1)/2).
        let f = NodeField::sample(grid.clone(), 2, |_, x| {
            let (s, q) = ((PI * x[0]).sin(), (PI * (x[1] + 1.0) / 2.0).sin());
            let (sc, qc) = ((PI * x[0]).cos(), (PI * (x[1] + 1.0) / 2.0).cos());
            let mixed = PI * sc * PI / 2.0 * qc;
            let d = [[-PI * PI * s * q, mixed], [mixed, -PI * PI / 4.0 * s * q]];
            (0..2)
                .map(|k| {
                    let mut v = 0.0;
                    for (i, row) in d.iter().enumerate() {
                        for (j, dij) in row.iter().enumerate() {
                            for r in 0..2 {
                                v += c.entry(0, i, j, k, r) * dij;
                            }
                        }
                    }
                    v
                })
                .collect()
        })?;
        let u = solve_elliptic(&c, &f, &cfg)?;
        let want = NodeField::sample(grid, 2, |_, x| {
            let v = (PI * x[0]).sin() * (PI * (x[1] + 1.0) / 2.0).sin();
            vec![v, v]
        })?;
        errors.push(l2_error(&u, &want)?);
        part.consume("solver-unknowns", (2 * (n + 1) * (n + 1)) as f64);
    }
    part.resolution("elliptic-grids", GRIDS.to_vec());
    part.resolution("elliptic-2d-grids", grids.to_vec());
    order_case(&mut part, "convergence/elliptic/coupled-2d", &grids, &errors);
    Ok(part)
}

/// Base grid and horizon of the a priori stability runs.
const STABILITY_GRIDS: [usize; 3] = [32, 64, 128];
const REFINE_LIMIT: f64 = 0.20;
const DILATION_LIMIT: f64 = 0.10;

fn largest_change(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).fold(0.0, f64::max)
}

fn stability_config(n: usize, p: f64, theta: f64) -> SolverConfig {
    SolverConfig { l: 3.0, widths: vec![], n1: n, n_trans: vec![], t_final: 0.5, nt: n, scheme: Scheme::ImplicitEuler, p, theta }
}

/// Coupled heat-type forcing; `c` selects the dilated copy `c²f(c²t, cx)`.
fn system_forcing(t: f64, x: f64, c: f64) -> Vec<f64> {
    let (s, y) = (c * c * t, c * x);
    vec![c * c * heat_forcing(s, y), -0.5 * c * c * heat_forcing(s, y - 0.4)]
}

fn parabolic_ratio(cfg: &SolverConfig, c: f64) -> Result<f64> {
    let f = NodeField::sample(cfg.grid()?, 2, |t, x| system_forcing(t, x[0], c))?;
    let u = solve_parabolic(&coupled()?, &f, cfg)?;
    apriori_ratio_parabolic(&u, &f, &cfg.norm()?)
}

fn elliptic_ratio(cfg: &SolverConfig, c: f64) -> Result<f64> {
    let f = NodeField::sample(cfg.spatial_grid()?, 2, |_, x| system_forcing(0.25 / (c * c), x[0], c))?;
    let u = solve_elliptic(&coupled()?, &f, cfg)?;
    apriori_ratio_elliptic(&u, &f, &cfg.norm()?)
}

fn apriori_stability(
    label: &str,
    ps: &[f64],
    thetas: &[f64],
    ratio: fn(&SolverConfig, f64) -> Result<f64>,
) -> Result<Part> {
    let mut part = Part::default();
    part.resolution(&format!("{label}-grids"), STABILITY_GRIDS.to_vec());
    for &p in ps {
        for &theta in thetas {
            let base = stability_config(STABILITY_GRIDS[0], p, theta);
            if !base.norm()?.admissible(1) {
                return Err(Error::Domain(format!("theta = {theta} is outside the admissible range for p = {p}")));
            }
            let mut ratios = Vec::new();
            for n in STABILITY_GRIDS {
                ratios.push(ratio(&stability_config(n, p, theta), 1.0)?);
                part.consume("solver-unknowns", (2 * (n + 1) * (n + 1)) as f64);
            }
            let name = format!("apriori/{label}/p={p}/theta={theta}");
            for (n, r) in STABILITY_GRIDS.iter().zip(&ratios) {
                part.point(&name, *n as f64, *r);
            }
            part.push(
                Case::at_most(&format!("{name}/refinement"), largest_change(&ratios), REFINE_LIMIT, 0.0, 0.0, BoundSource::Measured)
                    .param("p", p)
                    .param("theta", theta)
                    .param("ratios", ratios.clone()),
            );
            let mid = stability_config(STABILITY_GRIDS[1], p, theta);
            for c in [2.0, 4.0] {
                let r = ratio(&mid.dilated(c), c)?;
                let change = (r / ratios[1] - 1.0).abs();
                part.push(
                    Case::at_most(&format!("{name}/dilation={c}"), change, DILATION_LIMIT, 0.0, 0.0, BoundSource::Measured)
                        .param("p", p)
                        .param("theta", theta)
                        .param("c", c)
                        .param("ratio", r)
                        .param("undilated", ratios[1]),
                );
            }
        }
    }
    Ok(part)
}

/// Refinement and dilation stability of the parabolic a priori ratio for a
/// coupled heat system.
pub fn apriori_stability_parabolic(ps: &[f64], thetas: &[f64]) -> Result<Part> {
    apriori_stability("parabolic", ps, thetas, parabolic_ratio)
}

/// The same for the elliptic ratio.
pub fn apriori_stability_elliptic(ps: &[f64], thetas: &[f64]) -> Result<Part> {
    apriori_stability("elliptic", ps, thetas, elliptic_ratio)
}

/// Hölder quotients of a heat solution with `p = 8`, `κ = 1/2` under
/// refinement.
pub fn holder_stability() -> Result<Part> {
    let (p, kappa) = (8.0, 0.5);
    let mut part = Part::default();
    let mut space = Vec::new();
    let mut time = Vec::new();
    for n in STABILITY_GRIDS {
        let cfg = stability_config(n, p, 1.0);
        let f = NodeField::sample(cfg.grid()?, 1, |t, x| vec![heat_forcing(t, x[0])])?;
        let u = solve_parabolic(&scalar(1.0)?, &f, &cfg)?;
        let (s, t) = holder_quotients(&u, kappa, p)?;
        space.push(s);
        time.push(t);
        part.consume("solver-unknowns", ((n + 1) * (n + 1)) as f64);
    }
    part.resolution("holder-grids", STABILITY_GRIDS.to_vec());
    for (label, q) in [("space", &space), ("time", &time)] {
        let name = format!("holder/{label}");
        for (n, v) in STABILITY_GRIDS.iter().zip(q.iter()) {
            part.point(&name, *n as f64, *v);
        }
        let finite = q.iter().all(|v| v.is_finite() && *v > 0.0);
        part.push(Case::check(&format!("{name}/finite"), finite, BoundSource::Measured).param("quotients", q.clone()));
        part.push(
            Case::at_most(&format!("{name}/refinement"), largest_change(q), 0.15, 0.0, 0.0, BoundSource::Measured)
                .param("p", p)
                .param("kappa", kappa),
        );
    }
    Ok(part)
}

/// Discrete equations hold to round-off, zero data give zero solutions and
/// non-elliptic coefficients are rejected.
pub fn solver_sanity() -> Result<Part> {
    let mut part = Part::default();
    let cfg = unit_config(24, 12, Scheme::ImplicitEuler);
    let f = NodeField::sample(cfg.grid()?, 1, |t, x| vec![(1.0 + t) * x[0] * (1.0 - x[0])])?;
    let a = scalar(0.7)?;
    let u = solve_parabolic(&a, &f, &cfg)?;
    part.push(Case::at_most("sanity/parabolic-residual", parabolic_residual(&a, &u, &f, Scheme::ImplicitEuler)?, 1e-9, 0.0, 0.0, BoundSource::Exact));
    let g = NodeField::sample(cfg.spatial_grid()?, 2, |_, x| vec![x[0] * (1.0 - x[0]), 1.0])?;
    let c = coupled()?;
    let v = solve_elliptic(&c, &g, &cfg)?;
    part.push(Case::at_most("sanity/elliptic-residual", elliptic_residual(&c, &v, &g)?, 1e-9, 0.0, 0.0, BoundSource::Exact));
    let zero = NodeField::zeros(cfg.grid()?, 2);
    let z = solve_parabolic(&c, &zero, &cfg)?;
    part.push(Case::check("sanity/zero-data", z.max_abs() == 0.0, BoundSource::Exact));
    let rejected = matches!(solve_elliptic(&scalar(-1.0)?, &NodeField::zeros(cfg.spatial_grid()?, 1), &cfg), Err(Error::NotElliptic(_)));
    part.push(Case::check("sanity/ellipticity-rejected", rejected, BoundSource::Exact));
    Ok(part)
}
