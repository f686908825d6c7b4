use rand::Rng;

use super::Part;
use crate::corpus::rng_for;
use crate::dyadic::{parent_ratio, parent_ratio_bound, ParabolicCube};
use crate::error::Result;
use crate::measure::{interval_weight, phi, phi_ratio, HalfLineInterval, WeightParams};
use crate::report::{BoundSource, Case};

/// The exhaustive parent-ratio grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentSweep {
    pub levels: (i32, i32),
    pub i1_max: i64,
    pub i0: Vec<i64>,
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl Default for ParentSweep {
    fn default() -> Self {
        ParentSweep {
            levels: (-8, 8),
            i1_max: 4096,
            i0: (-3..=3).collect(),
            dims: vec![1, 2, 3],
            alphas: vec![-0.9, -0.5, 0.0, 1.0, 2.7, 5.0],
        }
    }
}

pub fn parent_ratio_sweep(sweep: &ParentSweep) -> Part {
    let mut part = Part::default();
    let mut count = 0usize;
    for &d in &sweep.dims {
        for &alpha in &sweep.alphas {
            let params = WeightParams::new(alpha).expect("sweep alphas exceed -1");
            let mut worst: f64 = 0.0;
            for n in sweep.levels.0..=sweep.levels.1 {
                for i1 in 0..=sweep.i1_max {
                    for &i0 in &sweep.i0 {
                        let mut i = vec![i1];
                        i.resize(d, -1);
                        let c = ParabolicCube::new(n, i0, i).expect("valid cube");
                        worst = worst.max(parent_ratio(&c, params));
                        count += 1;
                    }
                }
            }
            let bound = parent_ratio_bound(d, params);
            part.point("parent-ratio/max", alpha + 10.0 * d as f64, worst / bound);
            part.push(
                Case::at_most(&format!("parent-ratio/d={d}/alpha={alpha}"), worst, bound, 1e-12, 0.0, BoundSource::Theoretical)
                    .param("d", d)
                    .param("alpha", alpha),
            );
        }
    }
    let witness = parent_ratio(&ParabolicCube::new(0, 0, vec![0]).expect("valid cube"), WeightParams::new(1.0).expect("alpha = 1"));
    part.push(
        Case::at_most("parent-ratio/witness", (witness - 16.0).abs() / 16.0, 1e-12, 0.0, 0.0, BoundSource::Exact)
            .param("ratio", witness)
            .param("d", 1)
            .param("alpha", 1.0),
    );
    part.consume("parent_ratio_evaluations", count as f64);
    part
}

/// `(x, r, α)` log-uniform in `x, r ∈ [1e−6, 1e3]`, `α ∈ (−1, 6]`.
pub fn phi_ratio_sweep(n_points: usize, seed: u64) -> Result<Part> {
    let mut rng = rng_for(seed, 1);
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, 0.0);
    for _ in 0..n_points {
        let x = 10f64.powf(rng.random_range(-6.0..3.0));
        let r = 10f64.powf(rng.random_range(-6.0..3.0));
        let alpha = rng.random_range(-0.99..6.0);
        let q = phi_ratio(x, r, WeightParams::new(alpha)?)? / 2f64.powf(alpha + 1.0);
        if q > worst {
            worst = q;
            at = (x, r, alpha);
        }
    }
    let mut part = Part::default();
    part.push(
        Case::at_most("phi-ratio/max-normalized", worst, 1.0, 1e-12, 0.0, BoundSource::Theoretical)
            .param("points", n_points)
            .param("x", at.0)
            .param("r", at.1)
            .param("alpha", at.2),
    );
    part.consume("phi_ratio_evaluations", n_points as f64);
    Ok(part)
}

/// Additivity of interval weights, the `α = 0` case and the closed form
/// against `φ`.
pub fn additivity_checks(n: usize, seed: u64) -> Result<Part> {
    let mut rng = rng_for(seed, 2);
    let mut split: f64 = 0.0;
    let mut lebesgue: f64 = 0.0;
    let mut closed: f64 = 0.0;
    for _ in 0..n {
        let alpha = rng.random_range(-0.99..6.0);
        let params = WeightParams::new(alpha)?;
        let a = if rng.random_bool(0.1) { 0.0 } else { 10f64.powf(rng.random_range(-6.0..3.0)) };
        let c = a + 10f64.powf(rng.random_range(-9.0..3.0));
        let b = a + (c - a) * rng.random_range(0.01..0.99);
        if !(a < b && b < c) {
            continue;
        }
        let whole = interval_weight(HalfLineInterval::new(a, c)?, params);
        let parts = interval_weight(HalfLineInterval::new(a, b)?, params) + interval_weight(HalfLineInterval::new(b, c)?, params);
        split = split.max((whole - parts).abs() / whole);
        let flat = interval_weight(HalfLineInterval::new(a, c)?, WeightParams::new(0.0)?);
        lebesgue = lebesgue.max((flat - (c - a)).abs() / (c - a));
        if a > 0.0 && c > 2.0 * a {
            let via_phi = (phi(c, params)? - phi(a, params)?) / (alpha + 1.0);
            closed = closed.max((whole - via_phi).abs() / whole);
        }
    }
    let mut part = Part::default();
    part.push(Case::at_most("additivity/split", split, 1e-12, 0.0, 0.0, BoundSource::Exact).param("intervals", n));
    part.push(Case::at_most("additivity/lebesgue", lebesgue, 1e-15, 0.0, 0.0, BoundSource::Exact).param("intervals", n));
    part.push(Case::at_most("additivity/closed-form", closed, 1e-12, 0.0, 0.0, BoundSource::Exact).param("intervals", n));
    Ok(part)
}
