use super::*;

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

fn batch(seed: u64, n: usize, step: f64, t_max: f64) -> BatchSpec {
    BatchSpec::new(seed, n, step, t_max).unwrap()
}

fn line(lo: f64, len: f64, n: usize) -> GridSpec {
    GridSpec::spatial(vec![lo], vec![len], vec![n]).unwrap()
}

#[test]
fn degenerate_boundary() {
    let s = simulate_sigma(&[0.0, 0.7], &batch(1, 8, 0.01, 1.0), &[0.5, 1.0]).unwrap();
    for path in &s {
        for y in path {
            assert_eq!(y, &vec![0.0, 0.7]);
        }
    }
}

#[test]
fn xi_increments_have_the_exact_law() {
    let b = batch(7, 100_000, 0.01, 0.01);
    let s = simulate_sigma(&[1.0], &b, &[0.01]).unwrap();
    let xi: Vec<f64> = s.iter().map(|p| p[0][0].ln()).collect();
    let n = xi.len() as f64;
    let mean = xi.iter().sum::<f64>() / n;
    let var = xi.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(((mean - 0.02) / (0.02f64 / n).sqrt()).abs() < 4.0);
    // Var of the sample variance of a Gaussian is 2σ⁴/(n−1).
    assert!(((var - 0.02) / (2.0 * 0.02f64.powi(2) / (n - 1.0)).sqrt()).abs() < 4.0);
}

#[test]
fn first_coordinate_moments() {
    let x = 0.8;
    let b = batch(11, 20_000, 1e-3, 0.25);
    let s = simulate_sigma(&[x, 0.0], &b, &[0.1, 0.25]).unwrap();
    for (slot, t) in [(0usize, 0.1f64), (1, 0.25)] {
        let v: Vec<f64> = s.iter().map(|p| p[slot][0]).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let se = (v.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!((mean - x * (3.0 * t).exp()).abs() < 3.0 * se, "t = {t}: {mean} ± {se}");
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        // Binomial bracket for the median at ±3 standard deviations.
        let k = 3.0 * (n / 4.0).sqrt();
        let (lo, hi) = (sorted[(n / 2.0 - k) as usize], sorted[(n / 2.0 + k) as usize]);
        let median = x * (2.0 * t).exp();
        assert!(lo <= median && median <= hi);
    }
}

#[test]
fn transverse_variance() {
    let t = 0.25;
    let b = batch(5, 20_000, 1e-3, t);
    let s = simulate_sigma(&[1.0, 0.0, 0.0], &b, &[t]).unwrap();
    let want = ((8.0 * t).exp() - 1.0) / 4.0;
    for j in 1..3 {
        let v: Vec<f64> = s.iter().map(|p| p[0][j]).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let c2: Vec<f64> = v.iter().map(|y| (y - mean).powi(2)).collect();
        let var = c2.iter().sum::<f64>() / (n - 1.0);
        let se = (c2.iter().map(|c| (c - var).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!((var - want).abs() < 5.0 * se, "{var} vs {want} ± {se}");
    }
}

#[test]
fn point_estimates() {
    let f = bump(1.0, 2.0);
    let g = move |y: &[f64]| f(y[0]);
    let zero = |_: &[f64]| 0.0;
    let b = batch(3, 2000, 2e-3, 20.0);
    assert_eq!(estimate_ef(&zero, 0.0, &[1.2], &b).unwrap().value, 0.0);
    assert_eq!(estimate_ef(&g, 1.0, &[0.0], &b).unwrap().value, 0.0);
    let e = estimate_ef(&g, 1.0, &[1.2], &b).unwrap();
    let exact = ef_exact_1d(&f, (1.0, 2.0), 1.2, 4000);
    // Left sums along a Brownian path carry an O(step) bias; allow it in the budget.
    assert!((e.value - exact).abs() < 4.0 * e.stderr + 0.01 * exact, "{} ± {} vs {exact}", e.value, e.stderr);
    assert!(e.tail_budget < 3e-9);
    let e2 = estimate_ef(&g, 1.0, &[1.2], &batch(3, 4000, 2e-3, 20.0)).unwrap();
    let halving = e.stderr / e2.stderr / 2f64.sqrt();
    assert!((halving - 1.0).abs() < 0.2, "{halving}");
}

#[test]
fn grid_estimate_matches_point_estimates() {
    let f = bump(1.0, 2.0);
    let g = move |y: &[f64]| f(y[0]);
    let grid = line(0.0, 2.5, 10);
    let b = batch(9, 300, 5e-3, 10.0);
    let sup = Support { lo: vec![1.0], hi: vec![2.0] };
    let est = estimate_ef_grid(&g, 1.0, &sup, &grid, &b, &[]).unwrap();
    for i in [0, 3, 5, 8] {
        let x = grid.coord(0, i);
        let p = estimate_ef(&g, 1.0, &[x], &b).unwrap();
        assert!((est.mean.values()[i] - p.value).abs() <= 1e-12 * p.value.abs().max(1e-300));
        assert!((est.stderr.values()[i] - p.stderr).abs() <= 1e-9 * p.stderr.max(1e-300));
    }
    let mut buf = Vec::new();
    write_estimates(&est, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x,estimate,stderr,tail_budget\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn two_dimensional_grid_estimate() {
    let f = |y: &[f64]| bump(1.0, 2.0)(y[0]) * bump(-0.5, 0.5)(y[1]);
    let grid = GridSpec::spatial(vec![0.0, -1.0], vec![2.0, 2.0], vec![4, 4]).unwrap();
    let b = batch(2, 200, 5e-3, 5.0);
    let sup = Support { lo: vec![1.0, -0.5], hi: vec![2.0, 0.5] };
    let est = estimate_ef_grid(&f, 1.0, &sup, &grid, &b, &[]).unwrap();
    let node = 2 * 5 + 2;
    let p = estimate_ef(&f, 1.0, &[1.0, 0.0], &b).unwrap();
    assert!((est.mean.values()[node] - p.value).abs() <= 1e-12 * p.value);
}

#[test]
fn deterministic_across_thread_counts() {
    let f = bump(1.0, 2.0);
    let g = move |y: &[f64]| f(y[0]);
    let grid = line(0.0, 2.5, 20);
    let b = batch(4, 700, 1e-2, 8.0);
    let sup = Support { lo: vec![1.0], hi: vec![2.0] };
    let w = NodeField::sample(grid.clone(), 1, |_, x| vec![x[0]]).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_ef_grid(&g, 1.0, &sup, &grid, &b, &[w.clone()]).unwrap())
    };
    let (a, c) = (run(1), run(3));
    assert_eq!(a.mean, c.mean);
    assert_eq!(a.stderr, c.stderr);
    assert_eq!(a.functionals, c.functionals);
}

#[test]
fn l_examples() {
    let grid = line(0.0, 2.0, 16);
    let c = NodeField::sample(grid.clone(), 1, |_, _| vec![4.0]).unwrap();
    assert!(apply_l(&c).unwrap().max_abs() == 0.0);
    let lin = apply_l(&NodeField::sample(grid.clone(), 1, |_, x| vec![x[0]]).unwrap()).unwrap();
    let sq = apply_l(&NodeField::sample(grid.clone(), 1, |_, x| vec![x[0] * x[0]]).unwrap()).unwrap();
    for i in 1..16 {
        let x = grid.coord(0, i);
        assert!((lin.values()[i] - 3.0 * x).abs() < 1e-12);
        assert!((sq.values()[i] - 8.0 * x * x).abs() < 1e-11);
    }
    assert_eq!((lin.values()[0], lin.values()[16]), (0.0, 0.0));
}

#[test]
fn adjoint_is_the_transpose() {
    let grid = GridSpec::spatial(vec![0.5, -1.0], vec![1.5, 2.0], vec![9, 7]).unwrap();
    let u = NodeField::sample(grid.clone(), 1, |_, x| vec![(3.0 * x[0]).sin() * x[1]]).unwrap();
    let phi = NodeField::sample(grid, 1, |_, x| vec![(x[0] * x[1]).cos()]).unwrap();
    let lhs = inner(&apply_l(&u).unwrap(), &phi).unwrap();
    let rhs = inner(&u, &apply_l_adjoint(&phi).unwrap()).unwrap();
    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
}

#[test]
fn generator_of_the_kernel_returns_minus_f() {
    // 𝓔f is a potential of the diffusion, so Dynkin's formula gives 𝓛𝓔f = −f.
    let f = bump(1.0, 2.0);
    let grid = line(0.25, 2.5, 180);
    let ef = NodeField::sample(grid.clone(), 1, |_, x| vec![ef_exact_1d(&f, (1.0, 2.0), x[0], 4000)]).unwrap();
    let l = apply_l(&ef).unwrap();
    let mut worst: f64 = 0.0;
    for i in 1..180 {
        let x = grid.coord(0, i);
        worst = worst.max((l.values()[i] + f(x)).abs());
    }
    assert!(worst < 2e-2, "{worst}");

    let fnode = NodeField::sample(grid, 1, |_, x| vec![f(x[0])]).unwrap();
    let dec = divergence_decomposition(&ef, &fnode, 2.0).unwrap();
    let fnorm = crate::sobolev::weighted_lp_norm(&fnode, &crate::sobolev::NormSpec::lp(2.0, 1.0).unwrap()).unwrap();
    assert!((dec.reconstruction_error / fnorm - 2.0).abs() < 0.05);
    assert!(dec.norm_ratio.is_finite() && dec.norm_ratio > 0.0);
}

#[test]
fn residual_is_linear_under_common_random_numbers() {
    let grid = line(0.0, 3.0, 30);
    let b = batch(8, 300, 1e-2, 10.0);
    let sup = Support { lo: vec![0.9], hi: vec![2.1] };
    let f1 = bump(1.0, 2.0);
    let f2 = bump(0.9, 2.1);
    let g1 = move |y: &[f64]| f1(y[0]);
    let g2 = move |y: &[f64]| 2.0 * f2(y[0]);
    let g12 = move |y: &[f64]| f1(y[0]) + 2.0 * f2(y[0]);
    let tests: Vec<NodeField> = (0..3)
        .map(|k| NodeField::sample(grid.clone(), 1, |_, x| vec![bump(0.5 + 0.2 * k as f64, 2.5)(x[0])]).unwrap())
        .collect();
    let res = |g: &(dyn Fn(&[f64]) -> f64 + Sync), h: &dyn Fn(f64) -> f64| {
        let est = estimate_ef_grid(g, 3.0, &sup, &grid, &b, &[]).unwrap();
        let fnode = NodeField::sample(grid.clone(), 1, |_, x| vec![h(x[0])]).unwrap();
        weak_residual(&est.mean, &fnode, &tests).unwrap()
    };
    let r1 = res(&g1, &|x| f1(x));
    let r2 = res(&g2, &|x| 2.0 * f2(x));
    let r12 = res(&g12, &|x| f1(x) + 2.0 * f2(x));
    for k in 0..3 {
        assert!((r12[k] - r1[k] - r2[k]).abs() < 1e-10 * r12[k].abs().max(1e-3));
    }
    let zero = res(&|_: &[f64]| 0.0, &|_| 0.0);
    assert_eq!(zero, vec![0.0; 3]);
}

#[test]
fn batch_json() {
    let b: BatchSpec = serde_json::from_str(r#"{"seed": 3, "n_paths": 100, "step": 0.01, "T_max": 5}"#).unwrap();
    assert_eq!(b, batch(3, 100, 0.01, 5.0));
    let d: BatchSpec = serde_json::from_str(r#"{"seed": 3, "n_paths": 100}"#).unwrap();
    assert_eq!((d.step, d.t_max), (1e-3, 20.0));
    assert!(BatchSpec::new(0, 1, 0.1, 1.0).is_err());
}
