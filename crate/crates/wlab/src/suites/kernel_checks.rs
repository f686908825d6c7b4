use super::Part;
use crate::error::Result;
use crate::fields::{GridSpec, NodeField};
use crate::kernel::{
    apply_l_adjoint, divergence_decomposition, ef_exact_1d, estimate_ef_grid, inner, simulate_sigma, BatchSpec, Support,
};
use crate::report::{BoundSource, Case};

/// `64 (s(1−s))³` on `(a, b)`, zero elsewhere.
fn bump(a: f64, b: f64) -> impl Fn(f64) -> f64 + Sync + Copy {
    move |x: f64| {
        if x <= a || x >= b {
            0.0
        } else {
            let s = (x - a) / (b - a);
            (s * (1.0 - s)).powi(3) * 64.0
        }
    }
}

fn mean_se(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt(), var)
}

/// First moment of `(σ_t x)¹` at two times and the variance of both
/// transverse coordinates, from `x = (1, 0, 0)`.
pub fn kernel_moments(paths: usize, seed: u64) -> Result<Part> {
    let step = 1e-3;
    let times = [0.1, 0.25];
    let batch = BatchSpec::new(seed, paths, step, 0.25)?;
    let samples = simulate_sigma(&[1.0, 0.0, 0.0], &batch, &times)?;
    let mut part = Part::default();
    part.consume("paths", paths as f64);
    part.consume("path-steps", (paths * batch.n_steps()) as f64);
    part.resolution("moment-step", step);
    for (slot, t) in times.iter().enumerate() {
        let v: Vec<f64> = samples.iter().map(|p| p[slot][0]).collect();
        let (mean, se, _) = mean_se(&v);
        let exact = (3.0 * t).exp();
        part.push(
            Case::at_most(&format!("kernel/first-moment/t={t}"), (mean - exact).abs(), 3.0 * se, 0.0, 0.0, BoundSource::Exact)
                .param("t", *t)
                .param("mean", mean)
                .param("exact", exact)
                .param("stderr", se)
                .param("paths", paths),
        );
    }
    let t = times[1];
    let exact = ((8.0 * t).exp() - 1.0) / 4.0;
    // The Euler–Maruyama variance is the left sum 2h Σ e^{8kh}.
    let n = batch.n_steps();
    let discrete: f64 = (0..n).map(|k| 2.0 * step * (8.0 * k as f64 * step).exp()).sum();
    let bias = (discrete - exact).abs();
    for j in 1..3 {
        let v: Vec<f64> = samples.iter().map(|p| p[1][j]).collect();
        let (mean, _, var) = mean_se(&v);
        let c2: Vec<f64> = v.iter().map(|y| (y - mean).powi(2)).collect();
        let (_, var_se, _) = mean_se(&c2);
        part.push(
            Case::at_most(&format!("kernel/transverse-variance/j={j}"), (var - exact).abs(), 5.0 * var_se, 0.0, bias, BoundSource::Exact)
                .param("t", t)
                .param("variance", var)
                .param("exact", exact)
                .param("stderr", var_se)
                .param("step-bias", bias),
        );
    }
    Ok(part)
}

const WEAK_N: usize = 60;
const WEAK_STEP: f64 = 2e-3;
const WEAK_T_MAX: f64 = 12.0;

fn weak_grid(n: usize) -> Result<GridSpec> {
    GridSpec::spatial(vec![0.0], vec![3.0], vec![n])
}

fn tests_on(grid: &GridSpec) -> Result<Vec<NodeField>> {
    (0..3).map(|k| NodeField::sample(grid.clone(), 1, |_, x| vec![bump(0.5 + 0.2 * k as f64, 2.5)(x[0])])).collect()
}

fn exact_on(grid: &GridSpec) -> Result<NodeField> {
    let f = bump(1.0, 2.0);
    NodeField::sample(grid.clone(), 1, |_, x| vec![ef_exact_1d(&f, (1.0, 2.0), x[0], 4000)])
}

/// `⟨𝓔f, 𝓛*φ⟩ − ⟨f, φ⟩` per test function on the exact kernel.
fn exact_residuals(n: usize) -> Result<Vec<f64>> {
    let grid = weak_grid(n)?;
    let f = bump(1.0, 2.0);
    let ef = exact_on(&grid)?;
    let fnode = NodeField::sample(grid.clone(), 1, |_, x| vec![f(x[0])])?;
    tests_on(&grid)?.iter().map(|phi| Ok(inner(&ef, &apply_l_adjoint(phi)?)? - inner(&fnode, phi)?)).collect()
}

fn exact_reconstruction(n: usize) -> Result<f64> {
    let grid = weak_grid(n)?;
    let f = bump(1.0, 2.0);
    let fnode = NodeField::sample(grid.clone(), 1, |_, x| vec![f(x[0])])?;
    Ok(divergence_decomposition(&exact_on(&grid)?, &fnode, 2.0)?.reconstruction_error)
}

/// Weak residuals of the Monte Carlo `𝓔f` against three test functions and
/// the divergence reconstruction `MD_i f^i`, each against three standard
/// errors plus a discretization budget. The identities are checked as
/// stated; the negated forms are recorded alongside.
pub fn kernel_weak(paths: usize, seed: u64) -> Result<Part> {
    let f = bump(1.0, 2.0);
    let g = move |y: &[f64]| f(y[0]);
    let grid = weak_grid(WEAK_N)?;
    let batch = BatchSpec::new(seed, paths, WEAK_STEP, WEAK_T_MAX)?;
    let tests = tests_on(&grid)?;
    let weights: Vec<NodeField> = tests.iter().map(apply_l_adjoint).collect::<Result<_>>()?;
    let support = Support { lo: vec![1.0], hi: vec![2.0] };
    let est = estimate_ef_grid(&g, 1.0, &support, &grid, &batch, &weights)?;
    let fnode = NodeField::sample(grid.clone(), 1, |_, x| vec![f(x[0])])?;

    let mut part = Part::default();
    part.consume("paths", paths as f64);
    part.consume("path-steps", (paths * batch.n_steps()) as f64);
    part.resolution("weak-grid", WEAK_N);
    part.resolution("weak-step", WEAK_STEP);
    part.resolution("weak-T_max", WEAK_T_MAX);
    for (i, (m, s)) in est.mean.values().iter().zip(est.stderr.values()).enumerate() {
        let x = grid.coord(0, i);
        part.point("kernel/ef/estimate", x, *m);
        part.point("kernel/ef/stderr", x, *s);
    }

    let coarse = exact_residuals(WEAK_N)?;
    let fine = exact_residuals(2 * WEAK_N)?;
    for (k, (phi, w)) in tests.iter().zip(&weights).enumerate() {
        let (mean, se) = est.functionals[k];
        let target = inner(&fnode, phi)?;
        let wmass: f64 = w.values().iter().map(|v| v.abs()).sum::<f64>() * grid.h(0);
        let grid_budget = (coarse[k] - fine[k]).abs();
        let budget = grid_budget + (WEAK_STEP + est.tail_budget) * wmass;
        let name = format!("kernel/weak-residual/phi={k}");
        let with = |c: Case| {
            c.param("test", k)
                .param("pairing", mean)
                .param("target", target)
                .param("stderr", se)
                .param("grid-budget", grid_budget)
                .param("paths", paths)
        };
        part.push(with(Case::at_most(&name, (mean - target).abs(), 3.0 * se, 0.0, budget, BoundSource::Exact)));
        part.push(
            with(Case::descriptive(&format!("{name}/negated"), (mean + target).abs(), 3.0 * se + budget))
                .with_note("residual of <Ef, L*phi> + <f, phi>"),
        );
    }

    let dec = divergence_decomposition(&est.mean, &fnode, 2.0)?;
    let three_se = est.stderr.scale(3.0);
    let zero = NodeField::zeros(grid.clone(), 1);
    let noise = divergence_decomposition(&three_se, &zero, 2.0)?.reconstruction_error;
    let refinement = (exact_reconstruction(WEAK_N)? - exact_reconstruction(2 * WEAK_N)?).abs();
    let budget = noise + refinement;
    let with = |c: Case| c.param("noise-budget", noise).param("grid-budget", refinement).param("norm-ratio", dec.norm_ratio);
    part.push(with(Case::at_most("kernel/reconstruction", dec.reconstruction_error, 0.0, 0.0, budget, BoundSource::Exact)));
    let negated = divergence_decomposition(&est.mean, &fnode.scale(-1.0), 2.0)?.reconstruction_error;
    part.push(with(Case::descriptive("kernel/reconstruction/negated", negated, budget)).with_note("distance from MD_i f^i to -f"));
    Ok(part)
}
