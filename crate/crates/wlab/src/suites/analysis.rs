use rand::Rng;

use super::Part;
use crate::boxes::{dyadic_ladder, expand_clip, sharp_family, ParabolicBox};
use crate::corpus::{rng_for, ContinuumField, SmoothField};
use crate::dyadic::{dyadic_maximal, dyadic_sharp};
use crate::error::{Error, Result};
use crate::fields::{GridSpec, NodeField};
use crate::measure::WeightParams;
use crate::report::{BoundSource, Case};
use crate::sobolev::{bump_zeta, equiv_triple, holder_quotients, poincare_check, weighted_lp_norm, NormSpec};

const HL_ALPHAS: [f64; 3] = [0.0, 0.5, 1.5];
const HL_PS: [f64; 3] = [1.5, 2.0, 4.0];

/// Base and doubled resolution of the continuum corpus in dimension `d`.
fn levels(d: usize) -> (i32, i32) {
    if d == 1 {
        (2, 3)
    } else {
        (1, 2)
    }
}

/// Growth under resolution doubling of the largest Hardy–Littlewood quotient
/// `‖𝓜f‖_p/‖f‖_p` and Fefferman–Stein quotient `‖f‖_p/‖f^#‖_p`.
pub fn hl_fs_growth(n_fields: usize, seed: u64) -> Result<Part> {
    // worst[res][alpha][p] = (hl, fs)
    let mut worst = vec![vec![vec![(0.0f64, 0.0f64); HL_PS.len()]; HL_ALPHAS.len()]; 2];
    let mut cells = 0usize;
    for k in 0..n_fields {
        let mut rng = rng_for(seed, 2000 + k as u64);
        let d = 1 + k % 2;
        let field = ContinuumField::random(&mut rng, d, 0);
        let (coarse, fine) = levels(d);
        for (ai, &alpha) in HL_ALPHAS.iter().enumerate() {
            for (ri, n) in [coarse, fine].into_iter().enumerate() {
                let f = field.cellfield(n, alpha)?;
                cells += f.values().len();
                let m = dyadic_maximal(&f);
                let s = dyadic_sharp(&f);
                for (pi, &p) in HL_PS.iter().enumerate() {
                    let norm = f.lp_norm(p);
                    if norm == 0.0 {
                        continue;
                    }
                    let w = &mut worst[ri][ai][pi];
                    w.0 = w.0.max(m.lp_norm(p) / norm);
                    let sn = s.lp_norm(p);
                    w.1 = w.1.max(if sn > 0.0 { norm / sn } else { f64::INFINITY });
                }
            }
        }
    }
    let mut part = Part::default();
    for (ai, &alpha) in HL_ALPHAS.iter().enumerate() {
        for (pi, &p) in HL_PS.iter().enumerate() {
            for (label, pick) in [("hardy-littlewood", 0usize), ("fefferman-stein", 1)] {
                let get = |ri: usize| if pick == 0 { worst[ri][ai][pi].0 } else { worst[ri][ai][pi].1 };
                let (base, doubled) = (get(0), get(1));
                let growth = doubled / base - 1.0;
                let name = format!("{label}/alpha={alpha}/p={p}");
                part.point(&format!("{label}/max-quotient/base"), alpha * 10.0 + p, base);
                part.point(&format!("{label}/max-quotient/doubled"), alpha * 10.0 + p, doubled);
                let case = if base.is_finite() && doubled.is_finite() {
                    Case::at_most(&name, growth, 0.10, 0.0, 0.0, BoundSource::Measured)
                } else {
                    Case::check(&name, false, BoundSource::Measured).with_note("infinite quotient")
                };
                part.push(case.param("alpha", alpha).param("p", p).param("base", base).param("doubled", doubled).param("fields", n_fields));
            }
        }
    }
    part.consume("cells", cells as f64);
    Ok(part)
}

/// `N = 2 μ(Q_(n))/μ(C)` bounds `f^# / f^♯` when the family contains every
/// comparison box.
fn sharp_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    2.0 * df * df * (2.0 * df).powi(d as i32 - 1) * (2.0 * df).powf(alpha + 1.0)
}

/// Measured `max f^#/f^♯` over cells against the comparison-box constant, and
/// its change under resolution doubling.
pub fn sharp_comparison(n_fields: usize, seed: u64) -> Result<Part> {
    let mut part = Part::default();
    for d in [1usize, 2] {
        for &alpha in &HL_ALPHAS {
            let mut measured = [0.0f64; 2];
            for k in 0..n_fields {
                let mut rng = rng_for(seed, 3000 + k as u64);
                let field = ContinuumField::random(&mut rng, d, 0);
                let (coarse, fine) = levels(d);
                for (ri, n) in [coarse, fine].into_iter().enumerate() {
                    let f = field.cellfield(n, alpha)?;
                    let dy = dyadic_sharp(&f);
                    let fam = sharp_family(&f, &dyadic_ladder(n, 2))?;
                    let scale = f.max_abs().max(1e-300);
                    for (a, b) in dy.values().iter().zip(fam.values()) {
                        let q = if *b > 1e-14 * scale {
                            a / b
                        } else if *a > 1e-12 * scale {
                            f64::INFINITY
                        } else {
                            0.0
                        };
                        measured[ri] = measured[ri].max(q);
                    }
                }
            }
            let bound = sharp_constant(d, alpha);
            let name = format!("sharp-comparison/d={d}/alpha={alpha}");
            let with = |c: Case| c.param("d", d).param("alpha", alpha).param("base", measured[0]).param("doubled", measured[1]).param("fields", n_fields);
            part.push(with(Case::at_most(&format!("{name}/constant"), measured[1], bound, 0.0, 0.0, BoundSource::Theoretical)));
            let change = (measured[1] / measured[0] - 1.0).abs();
            part.push(with(Case::at_most(&format!("{name}/refinement"), change, 0.10, 0.0, 0.0, BoundSource::Measured)));
        }
    }
    Ok(part)
}

/// `mass(3Q ∩ Ω)/mass(Q)` over random boxes, including boxes touching
/// `x¹ = 0`, against `3^d(2 + 2^{α+1})`.
pub fn expansion_family(n: usize, seed: u64) -> Result<Part> {
    let mut part = Part::default();
    for d in 1..=3usize {
        for alpha in [0.0, 0.5, 1.0, 2.7, 5.0, -0.5, -0.9] {
            let params = WeightParams::new(alpha)?;
            let mut rng = rng_for(seed, 4000 + d as u64);
            let mut worst: f64 = 0.0;
            for k in 0..n {
                let r = 10f64.powf(rng.random_range(-3.0..1.0));
                let x1 = if k % 4 == 0 { r } else { r * 10f64.powf(rng.random_range(0.0..3.0)) };
                let xp: Vec<f64> = (1..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                let q = ParabolicBox::new(rng.random_range(-5.0..5.0), x1, xp, r)?;
                worst = worst.max(expand_clip(&q).mass(params) / q.mass(params));
            }
            let bound = 3f64.powi(d as i32) * (2.0 + 2f64.powf(alpha + 1.0));
            let name = format!("expansion/d={d}/alpha={alpha}");
            let case = if alpha >= 0.0 {
                Case::at_most(&name, worst, bound, 1e-9, 0.0, BoundSource::Theoretical)
            } else {
                Case::descriptive(&name, worst, bound).with_note("the bound relies on alpha >= 0")
            };
            part.push(case.param("d", d).param("alpha", alpha).param("boxes", n));
        }
    }
    Ok(part)
}

fn poincare_grid(d: usize, r: f64, a: f64, n: usize) -> Result<GridSpec> {
    let mut lo = vec![a - r];
    lo.extend(std::iter::repeat_n(-r, d - 1));
    GridSpec::spatial(lo, vec![2.0 * r; d], vec![n; d])
}

/// Weighted Poincaré inequality with a resolution-doubling budget.
pub fn poincare_corpus(n_fields: usize, seed: u64) -> Result<Part> {
    let mut part = Part::default();
    for k in 0..n_fields {
        let mut rng = rng_for(seed, 5000 + k as u64);
        let d = if k % 5 == 4 { 2 } else { 1 };
        let p = if d == 2 { 2.0 } else { [1.5, 2.0, 4.0][k % 3] };
        let field = SmoothField::random(&mut rng, d);
        let n = if d == 1 { 64 } else { 16 };
        for alpha in [0.0, 1.0, 2.5] {
            for (r, a) in [(0.5, 1.0), (1.0, 1.0), (0.25, 2.0)] {
                let mut sides = Vec::with_capacity(2);
                for m in [n, 2 * n] {
                    let u = NodeField::sample(poincare_grid(d, r, a, m)?, 1, |_, x| vec![field.eval(x)])?;
                    sides.push(poincare_check(&u, r, a, p, alpha)?);
                }
                let (lhs, bound) = sides[1];
                let budget = (sides[1].0 - sides[0].0).abs() + (sides[1].1 - sides[0].1).abs();
                part.point(&format!("poincare/alpha={alpha}"), k as f64, lhs / bound);
                part.push(
                    Case::at_most(&format!("poincare/field={k}/alpha={alpha}/r={r}/a={a}"), lhs, bound, 0.0, budget, BoundSource::Theoretical)
                        .param("d", d)
                        .param("p", p)
                        .param("alpha", alpha)
                        .param("r", r)
                        .param("a", a)
                        .param("n", 2 * n),
                );
            }
        }
    }
    Ok(part)
}

/// Both scaled suprema of the normalized bump against the calibrated `N(α)`,
/// and its unit `ν_α` mass.
pub fn bump_checks() -> Result<Part> {
    let mut part = Part::default();
    for alpha in [-0.9, -0.5, 0.0, 1.0, 2.5, 5.0] {
        for ratio in [1.0, 0.5, 0.1, 1e-3] {
            let name = format!("bump/alpha={alpha}/r/a={ratio}");
            match bump_zeta(1.0, ratio, alpha) {
                Ok(b) => {
                    let n = 20_000;
                    let h = b.r / n as f64;
                    let mut mass = 0.0;
                    for i in 0..n {
                        let x = b.a - b.r / 2.0 + (i as f64 + 0.5) * h;
                        mass += b.value(x) * x.powf(alpha) * h;
                    }
                    let top = b.sup_scaled.max(b.grad_scaled);
                    part.push(Case::at_most(&name, top, b.constant, 0.0, 0.0, BoundSource::Measured).param("alpha", alpha).param("r_over_a", ratio));
                    part.push(Case::at_most(&format!("{name}/mass"), (mass - 1.0).abs(), 1e-6, 0.0, 0.0, BoundSource::Exact));
                }
                Err(e) => part.push(Case::errored(&name, e.to_string())),
            }
        }
    }
    Ok(part)
}

/// Exact identities of the cell-rule norms: constants, homogeneity, the
/// triangle inequality, dilation covariance and Hölder quotients of a line.
pub fn norm_checks(seed: u64) -> Result<Part> {
    let mut part = Part::default();
    let mut rng = rng_for(seed, 6000);
    let line = GridSpec::spatial(vec![0.0], vec![2.0], vec![40])?;
    let mut worst_const: f64 = 0.0;
    for theta in [0.5, 1.0, 1.7, 3.0] {
        for p in [1.5, 2.0, 4.0] {
            let u = NodeField::sample(line.clone(), 1, |_, _| vec![3.0])?;
            let got = weighted_lp_norm(&u, &NormSpec::lp(p, theta)?)?;
            let e = theta - 1.0;
            let want = 3.0 * (2f64.powf(e + 1.0) / (e + 1.0)).powf(1.0 / p);
            worst_const = worst_const.max((got - want).abs() / want);
        }
    }
    part.push(Case::at_most("norms/constant", worst_const, 1e-12, 0.0, 0.0, BoundSource::Exact));

    let (mut homog, mut triangle, mut dilation): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..30 {
        let d = rng.random_range(1..=2);
        let grid = if d == 1 {
            GridSpec::spatial(vec![0.0], vec![2.0], vec![48])?
        } else {
            GridSpec::spatial(vec![0.0, -1.0], vec![2.0, 2.0], vec![24, 16])?
        };
        let f = SmoothField::random(&mut rng, d);
        let g = SmoothField::random(&mut rng, d);
        // Vanish to second order at x¹ = 0 so every weight stays integrable.
        let u = NodeField::sample(grid.clone(), 1, |_, x| vec![x[0] * x[0] * f.eval(x)])?;
        let v = NodeField::sample(grid.clone(), 1, |_, x| vec![x[0] * x[0] * g.eval(x)])?;
        let spec = NormSpec::new([1.5, 2.0, 4.0][rng.random_range(0..3)], rng.random_range(0.2..3.0), 2, 0)?;
        let c = rng.random_range(-3.0..3.0);
        let nu = weighted_lp_norm(&u, &spec)?;
        homog = homog.max((weighted_lp_norm(&u.scale(c), &spec)? - c.abs() * nu).abs() / nu.max(1e-300));
        let sum = weighted_lp_norm(&u.zip_with(&v, |a, b| a + b)?, &spec)?;
        triangle = triangle.max(sum / (nu + weighted_lp_norm(&v, &spec)?));
        let scale = rng.random_range(0.5..4.0);
        let (a0, b0, c0) = equiv_triple(&u, &spec)?;
        let (a1, b1, c1) = equiv_triple(&u.dilate(scale)?, &spec)?;
        let factor = scale.powf(1.0 - (spec.theta) / spec.p);
        for (x, y) in [(a0, a1), (b0, b1), (c0, c1)] {
            dilation = dilation.max((y - factor * x).abs() / (factor * x).max(1e-300));
        }
    }
    part.push(Case::at_most("norms/homogeneity", homog, 1e-12, 0.0, 0.0, BoundSource::Exact));
    part.push(Case::at_most("norms/triangle", triangle, 1.0, 1e-12, 0.0, BoundSource::Exact));
    part.push(Case::at_most("norms/dilation", dilation, 1e-10, 0.0, 0.0, BoundSource::Exact));

    let grid = GridSpec::new(0.0, 1.0, 8, vec![0.0], vec![1.0], vec![16])?;
    let u = NodeField::sample(grid, 1, |_, x| vec![x[0]])?;
    let (space, time) = holder_quotients(&u, 0.5, 8.0)?;
    part.push(Case::at_most("norms/holder-line", (space - 1.0).abs() + time, 1e-12, 0.0, 0.0, BoundSource::Exact));
    if holder_quotients(&u, 0.7, 8.0).is_ok() {
        return Err(Error::Domain("kappa above kappa0 accepted".into()));
    }
    Ok(part)
}
