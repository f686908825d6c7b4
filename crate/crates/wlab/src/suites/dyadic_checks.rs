use rand::Rng;

use super::Part;
use crate::corpus::{random_cellfield, rng_for, LipschitzField};
use crate::dyadic::{
    conditional_average, cz_decompose, locate_cube, parent_ratio, parent_ratio_bound, stopped_field, ParabolicCube, Window,
};
use crate::error::Result;
use crate::measure::WeightParams;
use crate::report::{BoundSource, Case};

const ALPHAS: [f64; 4] = [0.0, 0.5, 1.5, -0.5];

/// `|f_{|n} − f| ≤ L·diam(C_n)` for cell-centre samples of Lipschitz fields.
/// Windows are unions of level-0 cubes, so every tested ancestor lies inside.
pub fn martingale_check(n_fields: usize, seed: u64) -> Result<Part> {
    let mut part = Part::default();
    let mut worst: f64 = 0.0;
    let mut mass: f64 = 0.0;
    let mut levels_tested = 0usize;
    for k in 0..n_fields {
        let mut rng = rng_for(seed, 100 + k as u64);
        let d = 1 + k % 2;
        let alpha = ALPHAS[k % ALPHAS.len()];
        let (n_max, window) = if d == 1 {
            (3, Window::new(vec![0, 0], vec![64, 16])?)
        } else {
            (2, Window::new(vec![0, 0, -4], vec![16, 8, 4])?)
        };
        let field = LipschitzField::random(&mut rng, d);
        let f = field.cellfield(n_max, alpha, window.clone())?;
        for n in 0..=n_max {
            let avg = conditional_average(&f, n)?;
            levels_tested += 1;
            let diam = ParabolicCube::new(n, 0, vec![0; d])?.diameter();
            for (a, b) in avg.values().iter().zip(f.values()) {
                worst = worst.max((a - b).abs() / (field.lipschitz * diam));
            }
            let scale: f64 = f.values().iter().zip(f.cell_measures()).map(|(v, m)| v.abs() * m).sum();
            mass = mass.max((avg.integral()[0] - f.integral()[0]).abs() / scale);
        }
    }
    part.push(
        Case::at_most("martingale/lipschitz", worst, 1.0, 1e-12, 0.0, BoundSource::Theoretical)
            .param("fields", n_fields)
            .param("levels", levels_tested),
    );
    part.push(Case::at_most("martingale/mass", mass, 1e-12, 0.0, 0.0, BoundSource::Exact).param("fields", n_fields));
    Ok(part)
}

/// Located cubes contain their points, parents contain children and parent
/// ratios respect the certified bound.
pub fn filtration_checks(n: usize, seed: u64) -> Result<Part> {
    let mut rng = rng_for(seed, 3);
    let (mut located, mut nested, mut ratio) = (true, true, 0.0f64);
    for _ in 0..n {
        let d = rng.random_range(1..=3);
        let level = rng.random_range(-6..=6);
        let t = rng.random_range(-20.0..20.0);
        let mut x = vec![rng.random_range(0.0..20.0)];
        x.extend((1..d).map(|_| rng.random_range(-20.0..20.0)));
        let c = locate_cube(level, t, &x)?;
        let (t0, t1) = c.time_extent();
        located &= t0 <= t && t < t1;
        for (k, v) in x.iter().enumerate() {
            let (a, b) = c.space_extent(k);
            located &= a <= *v && *v < b;
        }
        let coarse = rng.random_range(level - 4..=level);
        nested &= c.ancestor(coarse).contains_cube(&c) && locate_cube(coarse, t, &x)? == c.ancestor(coarse);
        let params = WeightParams::new([0.0, 1.0, -0.5, 2.7][rng.random_range(0..4)])?;
        ratio = ratio.max(parent_ratio(&c, params) / parent_ratio_bound(d, params));
    }
    let mut part = Part::default();
    part.push(Case::check("filtration/locate", located, BoundSource::Exact).param("points", n));
    part.push(Case::check("filtration/nesting", nested, BoundSource::Exact).param("points", n));
    part.push(Case::at_most("filtration/parent-ratio", ratio, 1.0, 1e-12, 0.0, BoundSource::Theoretical).param("points", n));
    Ok(part)
}

/// Calderón–Zygmund identities on random nonnegative fields.
pub fn cz_invariants(n_fields: usize, seed: u64) -> Result<Part> {
    let mut mass: f64 = 0.0;
    let mut height: f64 = 0.0;
    let mut support: f64 = 0.0;
    let mut vanishing: f64 = 0.0;
    let mut stopped = 0usize;
    let mut part = Part::default();
    for k in 0..n_fields {
        let mut rng = rng_for(seed, 1000 + k as u64);
        let d = 1 + k % 2;
        let g = random_cellfield(&mut rng, d, ALPHAS[k % ALPHAS.len()])?;
        let total = g.integral()[0];
        let window_mass: f64 = g.cell_measures().iter().sum();
        let lambda = total / window_mass * rng.random_range(0.5..4.0);
        if !(lambda > 0.0) {
            continue;
        }
        let cz = cz_decompose(&g, lambda)?;
        let n0 = parent_ratio_bound(d, g.params());
        mass = mass.max((cz.eta.integral()[0] - total).abs() / total);
        let masses = cz.eta.cell_measures();
        let mut xi_support = 0.0;
        for (c, t) in cz.tau.values().iter().enumerate() {
            if t.is_some() {
                stopped += 1;
                height = height.max(cz.eta.values()[c] / (n0 * lambda));
            }
            if cz.xi.values()[c] != 0.0 {
                xi_support += masses[c];
            }
        }
        support = support.max(xi_support * lambda / total);
        let back = stopped_field(&cz.xi, &cz.tau)?;
        let scale = g.max_abs().max(cz.eta.max_abs());
        vanishing = vanishing.max(back.max_abs() / scale);
        part.point("cz/support-fraction", k as f64, xi_support * lambda / total);
    }
    part.push(Case::at_most("cz/mass", mass, 1e-10, 0.0, 0.0, BoundSource::Exact).param("fields", n_fields));
    part.push(Case::at_most("cz/height", height, 1.0, 0.0, 0.0, BoundSource::Theoretical).param("fields", n_fields).param("stopped_cells", stopped));
    part.push(Case::at_most("cz/support", support, 1.0, 1e-12, 0.0, BoundSource::Theoretical).param("fields", n_fields));
    part.push(Case::at_most("cz/xi-stopped", vanishing, 1e-12, 0.0, 0.0, BoundSource::Exact).param("fields", n_fields));
    Ok(part)
}
