//! Trend experiments on solver output: decay of the mean oscillation of
//! `u_xx` for caloric fields, the sharp-function estimate with a fitted
//! constant, and the behaviour of the a priori ratio as `θ` leaves the
//! admissible range.

use serde::{Deserialize, Serialize};

use crate::boxes::{box_oscillation, dyadic_ladder, maximal_family, ParabolicBox};
use crate::corpus::{caloric_corpus, CaloricField};
use crate::dyadic::CellField;
use crate::error::{Error, Result};
use crate::fields::{GridSpec, NodeField};
use crate::measure::WeightParams;
use crate::report::{BoundSource, Case, SuiteReport};
use crate::sobolev::{integrate, NormSpec};
use crate::solver::{apriori_ratio_parabolic, homogeneous_local_solve, solve_parabolic, LocalBox, Scheme, SolverConfig, SystemCoefficients};

pub const EXPERIMENTS: [&str; 3] = ["oscillation-decay", "sharp-estimate", "theta-boundary"];

/// Weighted mean `⨍ g μ` of every component and `⨍ |g − mean|^p μ`, with
/// `μ = (x¹)^α` over the whole grid of `g`.
fn weighted_oscillation(g: &NodeField, alpha: f64, p: f64) -> (Vec<f64>, f64) {
    let d1 = g.d1();
    let grid = g.grid();
    let mass = integrate(grid, alpha, &vec![1.0; g.values().len() / d1]);
    let means: Vec<f64> = (0..d1)
        .map(|k| integrate(grid, alpha, &g.values().iter().skip(k).step_by(d1).copied().collect::<Vec<_>>()) / mass)
        .collect();
    let dev: Vec<f64> = g
        .values()
        .chunks(d1)
        .map(|c| c.iter().zip(&means).map(|(v, m)| (v - m) * (v - m)).sum::<f64>().sqrt().powf(p))
        .collect();
    (means, integrate(grid, alpha, &dev) / mass)
}

/// `⨍ |g|^p μ` over the grid of `g`.
fn weighted_power_mean(g: &NodeField, alpha: f64, p: f64) -> f64 {
    let d1 = g.d1();
    let grid = g.grid();
    let mass = integrate(grid, alpha, &vec![1.0; g.values().len() / d1]);
    let dens: Vec<f64> = g.values().chunks(d1).map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().powf(p)).collect();
    integrate(grid, alpha, &dens) / mass
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillationConfig {
    pub p: Vec<f64>,
    pub theta: f64,
    pub a: f64,
    pub r: f64,
    pub lambdas: Vec<f64>,
    /// Spatial intervals per `r` on the fine solve that resolves `Q_r`.
    pub fine_per_r: usize,
    /// Time steps per `r²` on the fine solve.
    pub fine_steps_per_r2: usize,
    /// Spatial intervals of every large-box solve.
    pub n_box: usize,
    /// Largest time step of the large-box solves.
    pub max_dt: f64,
    pub min_denominator: f64,
    pub slope_fraction: f64,
    pub fields: Vec<String>,
}

impl Default for OscillationConfig {
    fn default() -> Self {
        OscillationConfig {
            p: vec![2.0],
            theta: 1.0,
            a: 1.0,
            r: 0.5,
            lambdas: vec![4.0, 8.0, 16.0, 32.0],
            fine_per_r: 16,
            fine_steps_per_r2: 32,
            n_box: 128,
            max_dt: 1.0 / 32.0,
            min_denominator: 1e-12,
            slope_fraction: 0.7,
            fields: caloric_corpus().iter().map(|f| f.name.to_string()).collect(),
        }
    }
}

/// Data of one caloric field: the numerator on `Q_r`, the denominators over
/// the `λ` sweep and the largest relative error of the discrete `u_xx`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationRun {
    pub oscillation: f64,
    pub denominators: Vec<f64>,
    pub discretization: f64,
}

fn local_second_derivative(field: &CaloricField, grid: &GridSpec) -> Result<(NodeField, f64)> {
    let value = field.value;
    let t_end = grid.t0 + grid.t_len;
    let u = homogeneous_local_solve(&field.coeffs, grid, &|x| value(t_end, x[0]), &|t, x| value(t, x[0]), Scheme::CrankNicolson)?;
    let uxx = u.derivative(&[2], 0)?;
    let exact = NodeField::sample(grid.clone(), uxx.d1(), |t, x| (field.second)(t, x[0]))?;
    let scale = exact.max_abs();
    let abs = uxx.zip_with(&exact, |a, b| a - b)?.max_abs();
    let err = if scale > 0.0 { abs / scale } else { abs };
    Ok((uxx, err))
}

/// Runs one field of the oscillation-decay sweep at exponent `p`.
pub fn oscillation_run(field: &CaloricField, cfg: &OscillationConfig, p: f64) -> Result<OscillationRun> {
    let d = 1.0;
    if !(cfg.theta > d - 1.0 && cfg.theta <= d) {
        return Err(Error::Domain(format!("theta must lie in (d-1, d], got {}", cfg.theta)));
    }
    if !(cfg.r > 0.0 && cfg.r <= cfg.a) {
        return Err(Error::Domain(format!("need 0 < r <= a, got r = {}, a = {}", cfg.r, cfg.a)));
    }
    if let Some(l) = cfg.lambdas.iter().find(|l| **l * cfg.r / cfg.a < 2.0) {
        return Err(Error::Domain(format!("lambda r / a must be at least 2, got {}", l * cfg.r / cfg.a)));
    }
    let alpha = cfg.theta - d + p;
    let (a, r) = (cfg.a, cfg.r);

    // Q_r(0, a) sits inside the fine box Q_{2a}(0, a) ∩ Ω = (0, 4a²) × (0, 3a).
    let fine = LocalBox { t0: 0.0, a, x0: vec![], r, lambda: 2.0 * a / r };
    let h = r / cfg.fine_per_r as f64;
    let n1 = (3.0 * a / h).round() as usize;
    let nt = ((2.0 * a / r).powi(2) * cfg.fine_steps_per_r2 as f64).round() as usize;
    let grid = fine.grid(n1, 0, nt)?;
    if ((a - r) / h - ((a - r) / h).round()).abs() > 1e-9 {
        return Err(Error::Grid("a - r is not a multiple of the fine step".into()));
    }
    let (uxx, mut discretization) = local_second_derivative(field, &grid)?;
    let lo1 = ((a - r) / h).round() as usize;
    let sub = uxx.subgrid(&[0, lo1], &[cfg.fine_steps_per_r2, lo1 + 2 * cfg.fine_per_r])?;
    let (_, oscillation) = weighted_oscillation(&sub, alpha, p);

    let mut denominators = Vec::with_capacity(cfg.lambdas.len());
    for &lambda in &cfg.lambdas {
        let b = LocalBox { t0: 0.0, a, x0: vec![], r, lambda };
        let duration = b.radius().powi(2);
        let nt = cfg.n_box.max((duration / cfg.max_dt).ceil() as usize);
        let (uxx, err) = local_second_derivative(field, &b.grid(cfg.n_box, 0, nt)?)?;
        discretization = discretization.max(err);
        denominators.push(weighted_power_mean(&uxx, alpha, p));
    }
    Ok(OscillationRun { oscillation, denominators, discretization })
}

pub fn experiment_oscillation_decay(cfg: &OscillationConfig, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("oscillation-decay", seed);
    report.resolution("fine_per_r", cfg.fine_per_r);
    report.resolution("fine_steps_per_r2", cfg.fine_steps_per_r2);
    report.resolution("n_box", cfg.n_box);
    report.resolution("max_dt", cfg.max_dt);
    let corpus = caloric_corpus();
    for name in &cfg.fields {
        if !corpus.iter().any(|f| f.name == name) {
            return Err(Error::Unknown(format!("caloric field {name}")));
        }
    }
    for &p in &cfg.p {
        for field in corpus.iter().filter(|f| cfg.fields.iter().any(|n| n == f.name)) {
            let run = oscillation_run(field, cfg, p)?;
            let case_name = format!("oscillation-decay/{}/p={p}", field.name);
            let x: Vec<f64> = cfg.lambdas.iter().map(|l| (1.0 + l * cfg.r / cfg.a).ln()).collect();
            for (i, den) in run.denominators.iter().enumerate() {
                let ratio = if *den > cfg.min_denominator { run.oscillation / den } else { f64::NAN };
                if ratio.is_finite() {
                    report.point(&case_name, x[i], ratio);
                }
            }
            let with = |c: Case| {
                c.param("p", p)
                    .param("theta", cfg.theta)
                    .param("a", cfg.a)
                    .param("r", cfg.r)
                    .param("lambdas", cfg.lambdas.clone())
                    .param("oscillation", run.oscillation)
                    .param("denominators", run.denominators.clone())
                    .param("discretization", run.discretization)
            };
            if run.denominators.iter().any(|d| *d <= cfg.min_denominator) {
                report.push(with(Case::descriptive(&case_name, f64::NAN, f64::NAN)).with_note("excluded: denominator below the minimum"));
                continue;
            }
            let osc_scale = run.denominators[0];
            if run.oscillation <= 1e-20 * osc_scale {
                report.push(with(Case::descriptive(&case_name, 0.0, 0.0)).with_note("degenerate: u_xx has no oscillation on Q_r"));
                continue;
            }
            let y: Vec<f64> = run.denominators.iter().map(|d| (run.oscillation / d).ln()).collect();
            let slope = fit_slope(&x, &y);
            // Relative errors of size e in u_xx move each log ratio by at most
            // about 2pe, which bounds the change in the fitted slope.
            let spread = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x.iter().cloned().fold(f64::INFINITY, f64::min);
            let budget = 4.0 * p * run.discretization / spread;
            report.push(with(Case::at_most(&case_name, slope, -cfg.slope_fraction * p, 0.0, budget, BoundSource::Theoretical)));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpConfig {
    pub p: f64,
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Level of the cells that carry `u_xx` and `f`.
    pub n_max: i32,
    /// Node intervals per cell side in space.
    pub nodes_per_cell: usize,
    pub epsilons: Vec<f64>,
    pub radii: Vec<f64>,
    pub centres: Vec<f64>,
    pub starts: Vec<f64>,
    /// Extra radii and centres of the refined sweep.
    pub extra_radii: Vec<f64>,
    pub extra_centres: Vec<f64>,
    pub stability: f64,
}

impl Default for SharpConfig {
    fn default() -> Self {
        SharpConfig {
            p: 2.0,
            theta: 1.0,
            l: 4.0,
            t_final: 1.0,
            n_max: 3,
            nodes_per_cell: 2,
            epsilons: vec![0.5, 0.1],
            radii: vec![0.25, 0.5],
            centres: vec![1.0, 1.5, 2.0, 2.5],
            starts: vec![0.0, 0.25, 0.5],
            extra_radii: vec![0.375],
            extra_centres: vec![1.25, 1.75, 2.25],
            stability: 0.25,
        }
    }
}

/// Heat-system bump forcing supported in `(0.2, 0.6) × (1, 2)`.
fn bump_forcing(t: f64, x: f64) -> f64 {
    let s = |v: f64, lo: f64, hi: f64| {
        if v <= lo || v >= hi {
            0.0
        } else {
            let y = 2.0 * (v - lo) / (hi - lo) - 1.0;
            (-1.0 / (1.0 - y * y)).exp() * std::f64::consts::E
        }
    };
    10.0 * s(t, 0.2, 0.6) * s(x, 1.0, 2.0)
}

/// Cell data for the sharp-function estimate: `u_xx`, `|u_xx|^q` and `|f|^q`
/// of the backward problem `u_t + u_xx = f` with `u(T) = 0`.
pub struct SharpFields {
    pub second: CellField,
    pub second_q: CellField,
    pub force_q: CellField,
}

pub fn sharp_fields(cfg: &SharpConfig) -> Result<SharpFields> {
    let d = 1usize;
    if !(cfg.p > 2.0 && cfg.theta > d as f64 - 1.0 && cfg.theta <= d as f64) && !(cfg.p <= 2.0 && cfg.p > 1.0 && cfg.theta > d as f64 + 1.0 - cfg.p && cfg.theta <= d as f64) {
        return Err(Error::Domain(format!("(p, theta) = ({}, {}) outside the estimate's range", cfg.p, cfg.theta)));
    }
    let q = cfg.theta - d as f64 + cfg.p;
    let cells_t = cfg.t_final * 4f64.powi(cfg.n_max);
    let cells_x = cfg.l * 2f64.powi(cfg.n_max);
    if (cells_t - cells_t.round()).abs() > 1e-9 || (cells_x - cells_x.round()).abs() > 1e-9 {
        return Err(Error::Grid("T and L must be whole numbers of cells".into()));
    }
    let n1 = cells_x.round() as usize * cfg.nodes_per_cell;
    let nt = cells_t.round() as usize * cfg.nodes_per_cell * cfg.nodes_per_cell;
    let config = SolverConfig { l: cfg.l, widths: vec![], n1, n_trans: vec![], t_final: cfg.t_final, nt, scheme: Scheme::ImplicitEuler, p: cfg.p, theta: cfg.theta };
    let grid = config.grid()?;
    let g = NodeField::sample(grid, 1, |t, x| vec![bump_forcing(t, x[0])])?;
    let u = solve_parabolic(&SystemCoefficients::identity(1, 1), &g, &config)?;
    // v(t) = u(T − t) solves v_t + v_xx = −g(T − t) with v(T) = 0.
    let reverse = |w: &NodeField, sign: f64| -> Result<NodeField> {
        let slices: Vec<NodeField> = (0..w.n_times()).rev().map(|k| w.time_slice(k).scale(sign)).collect();
        NodeField::from_slices(&slices, 0.0, cfg.t_final)
    };
    let vxx = reverse(&u.derivative(&[2], 0)?, 1.0)?;
    let f = reverse(&g, -1.0)?;
    let params = WeightParams::new(q)?;
    Ok(SharpFields {
        second: vxx.to_cellfield(cfg.n_max, params)?,
        second_q: vxx.map(|v| v.abs().powf(q)).to_cellfield(cfg.n_max, params)?,
        force_q: f.map(|v| v.abs().powf(q)).to_cellfield(cfg.n_max, params)?,
    })
}

/// Per box: the oscillation `osc_q` and, over the cells whose centre lies in
/// the box, the pairs `(𝕄(|u_xx|^q), 𝕄(|f|^q))`.
pub struct SharpSample {
    pub r: f64,
    pub a: f64,
    pub t0: f64,
    pub oscillation: f64,
    pub maximal: Vec<(f64, f64)>,
}

pub fn sharp_samples(fields: &SharpFields, cfg: &SharpConfig, radii: &[f64], centres: &[f64]) -> Result<Vec<SharpSample>> {
    let q = cfg.theta - 1.0 + cfg.p;
    let top = (cfg.l.max(cfg.t_final.sqrt())).log2().ceil() as i32 + 1;
    let ladder = dyadic_ladder(cfg.n_max, top);
    let ma = maximal_family(&fields.second_q, &ladder)?;
    let mb = maximal_family(&fields.force_q, &ladder)?;
    let ts = 4f64.powi(-cfg.n_max);
    let xs = 2f64.powi(-cfg.n_max);
    let mut out = Vec::new();
    for &r in radii {
        for &a in centres {
            for &t0 in &cfg.starts {
                if r > a || t0 + r * r > cfg.t_final + 1e-12 || a + r > cfg.l {
                    continue;
                }
                let b = ParabolicBox::new(t0, a, vec![], r)?;
                let oscillation = box_oscillation(&fields.second, &b, q)?[0];
                let ext = b.extent();
                let mut maximal = Vec::new();
                for idx in ma.window().iter() {
                    let c = [(idx[0] as f64 + 0.5) * ts, (idx[1] as f64 + 0.5) * xs];
                    if ext.contains_point(&c) {
                        maximal.push((ma.get(&idx)[0], mb.get(&idx)[0]));
                    }
                }
                out.push(SharpSample { r, a, t0, oscillation, maximal });
            }
        }
    }
    Ok(out)
}

/// Smallest `N` with `osc ≤ ε·A + N·B` at every sample, or `∞` when some
/// sample has `B = 0` and `osc > ε·A`.
pub fn minimal_constant(samples: &[SharpSample], eps: f64) -> f64 {
    let mut n: f64 = 0.0;
    for s in samples {
        for &(ma, mb) in &s.maximal {
            let excess = s.oscillation - eps * ma;
            if excess > 0.0 {
                n = n.max(if mb > 0.0 { excess / mb } else { f64::INFINITY });
            }
        }
    }
    n
}

pub fn experiment_sharp_estimate(cfg: &SharpConfig, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("sharp-estimate", seed);
    report.resolution("n_max", cfg.n_max);
    report.resolution("nodes_per_cell", cfg.nodes_per_cell);
    let fields = sharp_fields(cfg)?;
    let base = sharp_samples(&fields, cfg, &cfg.radii, &cfg.centres)?;
    let radii: Vec<f64> = cfg.radii.iter().chain(&cfg.extra_radii).copied().collect();
    let centres: Vec<f64> = cfg.centres.iter().chain(&cfg.extra_centres).copied().collect();
    let full = sharp_samples(&fields, cfg, &radii, &centres)?;
    report.consume("boxes", full.len() as f64);
    let q = cfg.theta - 1.0 + cfg.p;
    let mut fitted = Vec::new();
    for &eps in &cfg.epsilons {
        let n_base = minimal_constant(&base, eps);
        let n_full = minimal_constant(&full, eps);
        for s in &full {
            report.point(&format!("sharp-estimate/eps={eps}/per-box"), s.r * 100.0 + s.a, minimal_constant(std::slice::from_ref(s), eps));
        }
        let name = format!("sharp-estimate/eps={eps}");
        let with = |c: Case| c.param("epsilon", eps).param("p", cfg.p).param("theta", cfg.theta).param("q", q).param("n_base", n_base).param("n_full", n_full);
        report.push(with(Case::check(&format!("{name}/finite"), n_full.is_finite(), BoundSource::Measured)));
        let change = if n_base == n_full { 0.0 } else { (n_full - n_base).abs() / n_base.max(n_full) };
        report.push(with(Case::at_most(&format!("{name}/stability"), change, cfg.stability, 0.0, 0.0, BoundSource::Measured)));
        fitted.push((eps, n_full));
    }
    for w in fitted.windows(2) {
        let ((e0, n0), (e1, n1)) = (w[0], w[1]);
        if e1 < e0 {
            report.push(Case::at_least(&format!("sharp-estimate/monotone/eps={e1}<{e0}"), n1, n0, 0.0, 0.0, BoundSource::Measured));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaConfig {
    pub p: f64,
    pub thetas: Vec<f64>,
    pub n1: usize,
    pub refinements: usize,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub stability: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig {
            p: 2.0,
            thetas: vec![-0.5, 0.0, 0.25, 0.5, 1.0, 1.5, 1.75, 2.0, 2.5, 3.0],
            n1: 32,
            refinements: 3,
            l: 3.0,
            t_final: 0.5,
            stability: 0.2,
        }
    }
}

/// Heat-equation forcing supported in `(0.05, 0.45) × (0.5, 1.5)`.
pub fn heat_forcing(t: f64, x: f64) -> f64 {
    let s = |v: f64, lo: f64, hi: f64| if v <= lo || v >= hi { 0.0 } else { ((v - lo) * (hi - v)).powi(3) * 64.0 / (hi - lo).powi(6) };
    s(t, 0.05, 0.45) * s(x, 0.5, 1.5)
}

/// Ratios of the a priori quotient on `refinements` successive grid
/// doublings, with the norms integrated from the first interior node so that
/// inadmissible weights give finite, growing values.
pub fn theta_ratios(cfg: &ThetaConfig, theta: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for k in 0..cfg.refinements {
        let n = cfg.n1 << k;
        let config = SolverConfig { l: cfg.l, widths: vec![], n1: n, n_trans: vec![], t_final: cfg.t_final, nt: n, scheme: Scheme::ImplicitEuler, p: cfg.p, theta };
        let grid = config.grid()?;
        let f = NodeField::sample(grid, 1, |t, x| vec![heat_forcing(t, x[0])])?;
        let u = solve_parabolic(&SystemCoefficients::identity(1, 1), &f, &config)?;
        let lo = [0, 1];
        let hi = [n, n];
        let spec = NormSpec::lp(cfg.p, theta)?;
        out.push(apriori_ratio_parabolic(&u.subgrid(&lo, &hi)?, &f.subgrid(&lo, &hi)?, &spec)?);
    }
    Ok(out)
}

pub fn experiment_theta_boundary(cfg: &ThetaConfig, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("theta-boundary", seed);
    report.resolution("n1", cfg.n1);
    report.resolution("refinements", cfg.refinements);
    let mut thetas = cfg.thetas.clone();
    thetas.sort_by(|a, b| a.total_cmp(b));
    for theta in thetas {
        let ratios = theta_ratios(cfg, theta)?;
        let growth: Vec<f64> = ratios.windows(2).map(|w| w[1] / w[0]).collect();
        let worst = growth.iter().map(|g| (g - 1.0).abs()).fold(0.0, f64::max);
        report.point("theta-boundary/worst-change", theta, worst);
        for (k, r) in ratios.iter().enumerate() {
            report.point(&format!("theta-boundary/ratio/n={}", cfg.n1 << k), theta, *r);
        }
        let admissible = NormSpec::lp(cfg.p, theta)?.admissible(1);
        let name = format!("theta-boundary/theta={theta}");
        let case = if admissible {
            Case::at_most(&name, worst, cfg.stability, 0.0, 0.0, BoundSource::Measured)
        } else {
            Case::descriptive(&name, worst, cfg.stability).with_note("outside the admissible range")
        };
        report.push(case.param("theta", theta).param("p", cfg.p).param("admissible", admissible).param("ratios", ratios).param("growth", growth));
    }
    Ok(report)
}

fn parse<T: serde::de::DeserializeOwned + Default>(config: Option<&str>) -> Result<T> {
    match config {
        None => Ok(T::default()),
        Some(text) => serde_json::from_str(text).map_err(|e| Error::Config(e.to_string())),
    }
}

/// Runs the named experiment with a JSON config (defaults when `None`).
pub fn run_experiment(name: &str, config: Option<&str>, seed: u64) -> Result<SuiteReport> {
    match name {
        "oscillation-decay" => experiment_oscillation_decay(&parse(config)?, seed),
        "sharp-estimate" => experiment_sharp_estimate(&parse(config)?, seed),
        "theta-boundary" => experiment_theta_boundary(&parse(config)?, seed),
        other => Err(Error::Unknown(format!("experiment {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 2.0 * v).collect();
        assert!((fit_slope(&x, &y) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn heat_forcing_support() {
        assert_eq!(heat_forcing(0.04, 1.0), 0.0);
        assert_eq!(heat_forcing(0.25, 1.6), 0.0);
        assert!((heat_forcing(0.25, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn configs() {
        assert!(matches!(run_experiment("nope", None, 0), Err(Error::Unknown(_))));
        assert!(matches!(run_experiment("theta-boundary", Some(r#"{"bogus": 1}"#), 0), Err(Error::Config(_))));
        let cfg: ThetaConfig = parse(Some(r#"{"thetas": [1.0], "n1": 8, "refinements": 2}"#)).unwrap();
        assert_eq!(cfg.thetas, vec![1.0]);
        let r = run_experiment("theta-boundary", Some(r#"{"thetas": [1.0, 0.5], "n1": 8, "refinements": 2}"#), 0).unwrap();
        assert_eq!(r.cases.len(), 2);
        assert!(r.cases[0].parameters["theta"].as_f64() < r.cases[1].parameters["theta"].as_f64());
    }
}
