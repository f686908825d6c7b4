use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::measure::WeightParams;

fn w(a: f64) -> WeightParams {
    WeightParams::new(a).unwrap()
}

/// `8·1` on the unit cube `[0,1)×[0,1)` inside `window`, with `α = 0`, `d = 1`.
fn spike(window: Window) -> CellField {
    CellField::from_fn(1, w(0.0), 0, window, |i| vec![if i == [0, 0] { 8.0 } else { 0.0 }]).unwrap()
}

fn big_window() -> Window {
    Window::new(vec![0, 0], vec![4, 2]).unwrap()
}

#[test]
fn conditional_average_examples() {
    let f = spike(big_window());
    let g = conditional_average(&f, -1).unwrap();
    assert!(g.values().iter().all(|v| *v == 1.0));
    assert_eq!(conditional_average(&f, 0).unwrap(), f);
    assert!(conditional_average(&f, 1).is_err());
    let c = CellField::from_fn(1, w(1.5), 2, Window::new(vec![0, 0], vec![16, 4]).unwrap(), |_| vec![3.0]).unwrap();
    for n in [0, 1, 2] {
        let a = conditional_average(&c, n).unwrap();
        assert!(a.values().iter().all(|v| (v - 3.0).abs() < 1e-13));
    }
}

#[test]
fn stopping_time_examples() {
    let f = spike(big_window());
    let tau = build_stopping_time(&f, 1.0).unwrap();
    for idx in big_window().iter() {
        let expect = if idx == [0, 0] { Some(0) } else { None };
        assert_eq!(tau.get(&idx), expect);
    }
    let tau = build_stopping_time(&f, 0.5).unwrap();
    assert!(big_window().iter().all(|idx| tau.get(&idx) == Some(-1)));
    assert!(tau.is_measurable());

    // Built from the single cell, the map grows to cover the stopped cube.
    let small = spike(Window::new(vec![0, 0], vec![1, 1]).unwrap());
    let tau = build_stopping_time(&small, 0.5).unwrap();
    assert_eq!(tau.window(), &big_window());
    assert!(tau.values().iter().all(|v| *v == Some(-1)));

    let zero = CellField::zeros(1, w(0.0), 0, big_window()).unwrap();
    let tau = build_stopping_time(&zero, 1.0).unwrap();
    assert!(tau.values().iter().all(Option::is_none));
}

#[test]
fn stopped_field_examples() {
    let f = spike(big_window());
    let tau = build_stopping_time(&f, 1.0).unwrap();
    assert_eq!(stopped_field(&f, &tau).unwrap(), f);
    let tau = build_stopping_time(&f, 0.5).unwrap();
    let g = stopped_field(&f, &tau).unwrap();
    assert!(g.values().iter().all(|v| *v == 1.0));
    assert_eq!(g.integral(), vec![8.0]);

    let other = CellField::zeros(1, w(0.0), 1, big_window()).unwrap();
    assert!(stopped_field(&other, &tau).is_err());
}

#[test]
fn cz_examples() {
    let f = spike(big_window());
    let n0 = parent_ratio_bound(1, w(0.0));
    assert_eq!(n0, 8.0);
    let cz = cz_decompose(&f, 1.0).unwrap();
    assert_eq!(cz.eta, f);
    assert!(cz.xi.values().iter().all(|v| *v == 0.0));
    assert_eq!(cz.eta.get(&[0, 0])[0], n0 * 1.0);

    let cz = cz_decompose(&f, 9.0).unwrap();
    assert_eq!(cz.eta, f);
    assert!(cz.tau.values().iter().all(Option::is_none));
}

#[test]
fn maximal_and_sharp_examples() {
    let f = spike(big_window());
    let m = dyadic_maximal(&f);
    for idx in big_window().iter() {
        let expect = if idx == [0, 0] { 8.0 } else { 1.0 };
        assert_eq!(m.get(&idx)[0], expect);
    }
    let s = dyadic_sharp(&f);
    assert!((s.get(&[0, 0])[0] - 1.75).abs() < 1e-14);

    let flat = CellField::from_fn(1, w(0.5), 1, Window::new(vec![0, 0], vec![4, 2]).unwrap(), |_| vec![2.5]).unwrap();
    let m = dyadic_maximal(&flat);
    assert!(m.values().iter().all(|v| (v - 2.5).abs() < 1e-13));
}

/// Random field on a small window with a few zero cells.
fn random_field(rng: &mut ChaCha8Rng, d: usize, d1: usize, alpha: f64) -> CellField {
    let n_max = rng.random_range(-1..=2);
    let mut lo = vec![rng.random_range(-3..3), rng.random_range(0..3)];
    let mut hi = vec![lo[0] + rng.random_range(1..5), lo[1] + rng.random_range(1..4)];
    for _ in 1..d {
        let l = rng.random_range(-3..2);
        lo.push(l);
        hi.push(l + rng.random_range(1..4));
    }
    let window = Window::new(lo, hi).unwrap();
    CellField::from_fn(d1, w(alpha), n_max, window, |_| {
        (0..d1)
            .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(-3.0..5.0) })
            .collect()
    })
    .unwrap()
}

/// Brute-force sup of averages and oscillations over the ancestors of each
/// cell, down to a fixed depth.
fn brute_force(f: &CellField, depth: i32) -> (Vec<f64>, Vec<f64>) {
    let d1 = f.d1();
    let cells: Vec<Vec<i64>> = f.window().iter().collect();
    let masses = f.cell_measures();
    let mut max = vec![0.0f64; cells.len() * d1];
    let mut sharp = vec![0.0f64; cells.len() * d1];
    for (ci, idx) in cells.iter().enumerate() {
        let base = f.cube(idx);
        for n in (f.n_max() - depth..=f.n_max()).rev() {
            let cube = base.ancestor(n);
            let mu = cube_measure(&cube, f.params());
            let members: Vec<usize> =
                (0..cells.len()).filter(|&j| cube.contains_cube(&f.cube(&cells[j]))).collect();
            let inside: f64 = members.iter().map(|&j| masses[j]).sum();
            for c in 0..d1 {
                let val = |j: usize| f.values()[j * d1 + c];
                let avg_abs = members.iter().map(|&j| masses[j] * val(j).abs()).sum::<f64>() / mu;
                let avg = members.iter().map(|&j| masses[j] * val(j)).sum::<f64>() / mu;
                let osc = (members.iter().map(|&j| masses[j] * (val(j) - avg).abs()).sum::<f64>()
                    + (mu - inside) * avg.abs())
                    / mu;
                max[ci * d1 + c] = max[ci * d1 + c].max(avg_abs);
                sharp[ci * d1 + c] = sharp[ci * d1 + c].max(osc);
            }
        }
    }
    (max, sharp)
}

#[test]
fn operators_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..40 {
        let d = 1 + case % 2;
        let alpha = [0.0, -0.5, 1.0, 2.5][case % 4];
        let f = random_field(&mut rng, d, 1 + case % 3 / 2, alpha);
        let (bm, bs) = brute_force(&f, 16);
        let m = dyadic_maximal(&f);
        let s = dyadic_sharp(&f);
        for (a, b) in m.values().iter().zip(&bm) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "case {case}: max {a} vs {b}");
        }
        for (a, b) in s.values().iter().zip(&bs) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "case {case}: sharp {a} vs {b}");
        }
    }
}

/// Brute-force stopping time from the definition, scanning a fixed range.
fn brute_tau(g: &CellField, lambda: f64, idx: &[i64], depth: i32) -> Option<i32> {
    let masses = g.cell_measures();
    let cells: Vec<Vec<i64>> = g.window().iter().collect();
    let base = g.cube(idx);
    (g.n_max() - depth..=g.n_max()).find(|&n| {
        let cube = base.ancestor(n);
        let sum: f64 = (0..cells.len())
            .filter(|&j| cube.contains_cube(&g.cube(&cells[j])))
            .map(|j| masses[j] * g.values()[j])
            .sum();
        sum / cube_measure(&cube, g.params()) > lambda
    })
}

#[test]
fn stopping_time_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..30 {
        let g = random_field(&mut rng, 1 + case % 2, 1, [0.0, 1.0, -0.7][case % 3]).abs();
        let mut vals: Vec<f64> = g.values().to_vec();
        vals.sort_by(f64::total_cmp);
        let lambda = vals[vals.len() / 2].max(0.1);
        let tau = build_stopping_time(&g, lambda).unwrap();
        assert!(tau.is_measurable());
        let padded = g.pad_to(tau.window()).unwrap();
        for idx in tau.window().iter() {
            assert_eq!(tau.get(&idx), brute_tau(&padded, lambda, &idx, 20), "case {case} at {idx:?}");
        }
    }
}

#[test]
fn cz_identities_exact_on_dyadic_data() {
    // Eighths and α = 0 keep every average a dyadic rational.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let window = Window::new(vec![0, 0], vec![8, 4]).unwrap();
        let g = CellField::from_fn(1, w(0.0), 1, window, |_| vec![rng.random_range(0..64) as f64 / 8.0]).unwrap();
        let cz = cz_decompose(&g, 2.0).unwrap();
        let padded = g.pad_to(cz.tau.window()).unwrap();
        for ((x, e), v) in cz.xi.values().iter().zip(cz.eta.values()).zip(padded.values()) {
            assert_eq!(x + e, *v);
        }
        let back = stopped_field(&cz.xi, &cz.tau).unwrap();
        assert!(back.values().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn parent_ratio_bound_for_negative_alpha_is_sharp_enough() {
    for alpha in [-0.9, -0.5, -0.1] {
        let params = w(alpha);
        let bound = parent_ratio_bound(2, params);
        let mut worst = 0.0f64;
        for i1 in 0..2000 {
            worst = worst.max(parent_ratio(&ParabolicCube::new(0, 0, vec![i1, 0]).unwrap(), params));
        }
        assert!(worst <= bound * (1.0 + 1e-12));
        assert!(worst > 0.5 * bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn homogeneity(seed in 0u64..10_000, c in -4.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(&mut rng, 1 + (seed % 2) as usize, 2, 0.5);
        let m = dyadic_maximal(&f);
        let mc = dyadic_maximal(&f.scale(c));
        let s = dyadic_sharp(&f);
        let sc = dyadic_sharp(&f.scale(c));
        for (a, b) in mc.values().iter().zip(m.values()) {
            prop_assert!((a - c.abs() * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        for (a, b) in sc.values().iter().zip(s.values()) {
            prop_assert!((a - c.abs() * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn pointwise_bounds(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(&mut rng, 1 + (seed % 2) as usize, 1, -0.3);
        let m = dyadic_maximal(&f);
        let s = dyadic_sharp(&f);
        for ((v, mv), sv) in f.values().iter().zip(m.values()).zip(s.values()) {
            prop_assert!(*mv >= v.abs());
            prop_assert!(*sv <= 2.0 * mv * (1.0 + 1e-12));
        }
    }

    #[test]
    fn filtration_nesting(level in -6i32..6, i0 in -50i64..50, i1 in 0i64..50, i2 in -50i64..50, m in 0i32..6) {
        let c = ParabolicCube::new(level, i0, vec![i1, i2]).unwrap();
        let fine = ParabolicCube::new(level + m, i0 * 7 + 3, vec![i1 * 5 + 1, i2 * 3 - 2]).unwrap();
        let anc = fine.ancestor(level);
        prop_assert_eq!(anc == c, c.contains_cube(&fine));
        prop_assert!(anc.contains_cube(&fine));
    }

    #[test]
    fn cz_invariants(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_field(&mut rng, 1 + (seed % 2) as usize, 1, [0.0, 1.0, -0.5][(seed % 3) as usize]).abs();
        let lambda = 0.5 + rng.random_range(0.0..2.0);
        let cz = cz_decompose(&g, lambda).unwrap();
        let n0 = parent_ratio_bound(g.d(), g.params());
        let total = g.integral()[0];
        prop_assert!((cz.eta.integral()[0] - total).abs() <= 1e-10 * total.max(1e-300));
        let masses = cz.eta.cell_measures();
        let mut stopped_mass = 0.0;
        let mut stopped_integral = 0.0;
        for (k, t) in cz.tau.values().iter().enumerate() {
            if t.is_some() {
                prop_assert!(cz.eta.values()[k] <= n0 * lambda);
                stopped_mass += masses[k];
                stopped_integral += masses[k] * cz.eta.values()[k];
            }
        }
        prop_assert!(stopped_mass <= stopped_integral / lambda * (1.0 + 1e-12));
    }
}
