use proptest::prelude::*;

use super::*;

fn line(lo: f64, len: f64, n: usize) -> GridSpec {
    GridSpec::spatial(vec![lo], vec![len], vec![n]).unwrap()
}

fn trig(grid: GridSpec, k: f64, phase: f64) -> NodeField {
    NodeField::sample(grid, 1, |_, x| {
        vec![x.iter().enumerate().map(|(i, v)| (k * v + phase * (i + 1) as f64).sin()).sum::<f64>() * x[0]]
    })
    .unwrap()
}

#[test]
fn lp_norm_examples() {
    let g = GridSpec::spatial(vec![0.0, -1.0], vec![1.0, 2.0], vec![8, 8]).unwrap();
    let c = NodeField::sample(g.clone(), 1, |_, _| vec![-3.0]).unwrap();
    let spec = NormSpec::lp(2.0, 2.0).unwrap();
    assert!((weighted_lp_norm(&c, &spec).unwrap() - 3.0 * 2f64.sqrt()).abs() < 1e-12);

    let one = NodeField::sample(line(1.0, 1.0, 4), 1, |_, _| vec![1.0]).unwrap();
    let spec = NormSpec::lp(2.0, 2.0).unwrap();
    assert!((weighted_lp_norm(&one, &spec).unwrap() - 1.5f64.sqrt()).abs() < 1e-14);
}

#[test]
fn unit_weight_is_the_plain_trapezoid_norm() {
    let g = GridSpec::spatial(vec![0.0, -1.0], vec![2.0, 2.0], vec![10, 6]).unwrap();
    let u = trig(g.clone(), 2.3, 0.4);
    let p = 3.0;
    let mut want = 0.0;
    for i in 0..=10 {
        for j in 0..=6 {
            let wi = if i == 0 || i == 10 { 0.1 } else { 0.2 };
            let wj = if j == 0 || j == 6 { 1.0 / 6.0 } else { 1.0 / 3.0 };
            want += wi * wj * u.values()[i * 7 + j].abs().powf(p);
        }
    }
    let got = weighted_lp_norm(&u, &NormSpec::lp(p, 2.0).unwrap()).unwrap();
    assert!((got - want.powf(1.0 / p)).abs() <= 1e-10 * got);
}

#[test]
fn sobolev_norm_examples() {
    let g = line(0.5, 2.0, 32);
    let c = NodeField::sample(g.clone(), 1, |_, _| vec![2.0]).unwrap();
    let n0 = sobolev_norm_integer(&c, &NormSpec::new(2.0, 1.5, 0, 0).unwrap()).unwrap();
    let n1 = sobolev_norm_integer(&c, &NormSpec::new(2.0, 1.5, 1, 0).unwrap()).unwrap();
    assert!((n0 - n1).abs() < 1e-12);
    assert_eq!(n0, weighted_lp_norm(&c, &NormSpec::lp(2.0, 1.5).unwrap()).unwrap());

    let u = trig(g, 3.0, 0.1);
    let norms: Vec<f64> =
        (0..=2).map(|k| sobolev_norm_integer(&u, &NormSpec::new(2.5, 1.2, k, 0).unwrap()).unwrap()).collect();
    assert!(norms[0] < norms[1] && norms[1] < norms[2]);
    assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    assert_eq!(multi_indices(3, 1).len(), 3);
}

#[test]
fn m_inverse_at_the_boundary_uses_the_slope() {
    let u = NodeField::sample(line(0.0, 1.0, 16), 1, |_, x| vec![3.0 * x[0] + x[0] * x[0]]).unwrap();
    let v = apply_m(&u, -1).unwrap();
    assert!((v.values()[0] - 3.0).abs() < 1e-12);
    assert!((v.values()[8] - 3.5).abs() < 1e-12);
    assert!(apply_m(&u, -2).is_err());
}

#[test]
fn equiv_triple_examples() {
    let g = GridSpec::spatial(vec![0.0, -1.0], vec![2.0, 2.0], vec![16, 8]).unwrap();
    let spec = NormSpec::lp(3.0, 1.7).unwrap();
    assert_eq!(equiv_triple(&NodeField::zeros(g.clone(), 1), &spec).unwrap(), (0.0, 0.0, 0.0));
    let w = trig(g, 2.0, 0.3);
    let (a, b, c) = equiv_triple(&w, &spec).unwrap();
    let (a2, b2, c2) = equiv_triple(&w.scale(-2.5), &spec).unwrap();
    for (x, y) in [(a, a2), (b, b2), (c, c2)] {
        assert!((y - 2.5 * x).abs() < 1e-12 * y);
    }
}

#[test]
fn equiv_triple_dilation_exponents() {
    // w^c(x) = w(cx): substituting y = cx in each integral gives the factor
    // c^{p−θ}, so every term scales as c^{1−θ/p} in space and picks up a
    // further c^{−2/p} when integrated over time.
    let (p, theta) = (2.5, 1.6);
    let g = GridSpec::spatial(vec![0.0, -1.0], vec![2.0, 2.0], vec![16, 8]).unwrap();
    let spec = NormSpec::lp(p, theta).unwrap();
    let w = trig(g, 1.7, 0.2);
    let base = equiv_triple(&w, &spec).unwrap();
    for c in [2.0, 4.0] {
        let s = equiv_triple(&w.dilate(c).unwrap(), &spec).unwrap();
        let f = c.powf(1.0 - theta / p);
        for (x, y) in [(base.0, s.0), (base.1, s.1), (base.2, s.2)] {
            assert!((y - f * x).abs() < 1e-10 * y, "{x} {y} {f}");
        }
    }
    let traj = NodeField::sample(GridSpec::new(0.0, 1.0, 4, vec![0.0], vec![1.0], vec![8]).unwrap(), 1, |t, x| {
        vec![(1.0 + t) * x[0] * (1.0 - x[0])]
    })
    .unwrap();
    let n = derivative_term(&traj, 1, 0, 0, p, theta).unwrap().powf(1.0 / p);
    let n4 = derivative_term(&traj.dilate(4.0).unwrap(), 1, 0, 0, p, theta).unwrap().powf(1.0 / p);
    assert!((n4 - 4f64.powf(1.0 - theta / p - 2.0 / p) * n).abs() < 1e-10 * n4);
}

#[test]
fn poincare_linear_example() {
    let (a, r) = (1.0, 0.5);
    let n = 64;
    let u = NodeField::sample(line(a - r, 2.0 * r, n), 1, |_, x| vec![x[0]]).unwrap();
    let (lhs, bound) = poincare_check(&u, r, a, 2.0, 0.0).unwrap();
    let l = 2.0 * r;
    let discrete = l.powi(4) / 6.0 * (1.0 - 1.0 / (n * n) as f64);
    assert!((lhs - discrete).abs() < 1e-12);
    assert!((bound - 4.0 * l.powi(4)).abs() < 1e-12);
    assert!(((lhs / bound) - 1.0 / 24.0).abs() < 1e-3);

    let c = NodeField::sample(line(a - r, 2.0 * r, n), 1, |_, _| vec![5.0]).unwrap();
    assert_eq!(poincare_check(&c, r, a, 2.0, 1.0).unwrap().0, 0.0);
    assert!(matches!(poincare_check(&u, r, a, 2.0, -0.5), Err(Error::InvalidAlpha(_))));
    assert!(poincare_check(&u, r, 2.0 * a, 2.0, 0.0).is_err());
}

#[test]
fn poincare_on_trigonometric_fields() {
    for alpha in [0.0, 1.0, 2.5] {
        for (d, p) in [(1usize, 1.5), (1, 4.0), (2, 2.0)] {
            let (a, r) = (0.8, 0.6);
            let n = if d == 1 { 64 } else { 16 };
            let grid = |n: usize| {
                let mut lo = vec![a - r];
                lo.extend(vec![-r; d - 1]);
                let mut len = vec![2.0 * r];
                len.extend(vec![2.0 * r; d - 1]);
                GridSpec::spatial(lo, len, vec![n; d]).unwrap()
            };
            let (l1, b1) = poincare_check(&trig(grid(n), 5.0, 0.7), r, a, p, alpha).unwrap();
            let (l2, b2) = poincare_check(&trig(grid(2 * n), 5.0, 0.7), r, a, p, alpha).unwrap();
            let budget = (l2 - l1).abs() + (b2 - b1).abs();
            assert!(l2 <= b2 * (1.0 + 1e-6) + budget, "alpha {alpha}, d {d}, p {p}: {l2} vs {b2}");
        }
    }
}

#[test]
fn bump_examples() {
    let b = bump_zeta(2.0, 0.5, 0.0).unwrap();
    let sup_psi = PSI_NORM * (-1f64).exp();
    assert!((b.sup_scaled - 2.0 * sup_psi).abs() < 1e-12);
    assert_eq!(b.value(2.0 + 0.25), 0.0);
    assert_eq!(b.value(2.0 - 0.26), 0.0);
    assert!(bump_zeta(1.0, 1.5, 0.0).is_err());

    for alpha in [-0.5, 0.0, 1.0, 2.5] {
        let b = bump_zeta(1.5, 0.9, alpha).unwrap();
        // Composite Simpson over the support.
        let n = 20_000;
        let (lo, h) = (b.a - b.r / 2.0, b.r / n as f64);
        let mut s = 0.0;
        for k in 0..=n {
            let x = lo + k as f64 * h;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * b.value(x) * x.powf(alpha);
        }
        assert!((s * h / 3.0 - 1.0).abs() < 1e-8, "alpha {alpha}: {}", s * h / 3.0);
    }
}

#[test]
fn psi_constant_is_normalized() {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let s: f64 = (1..n).map(|k| psi(-0.5 + k as f64 * h).0).sum::<f64>() * h;
    assert!((s - 1.0).abs() < 1e-12);
}

#[test]
fn holder_examples() {
    let g = GridSpec::new(0.0, 1.0, 4, vec![0.0], vec![1.0], vec![8]).unwrap();
    assert_eq!(holder_quotients(&NodeField::zeros(g.clone(), 1), 0.5, 8.0).unwrap(), (0.0, 0.0));
    let lin = NodeField::sample(g.clone(), 1, |_, x| vec![x[0]]).unwrap();
    let (s, t) = holder_quotients(&lin, 0.5, 8.0).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    assert_eq!(t, 0.0);
    assert!(holder_quotients(&lin, 0.7, 8.0).is_err());
    assert!(holder_quotients(&lin, 0.1, 3.0).is_err());
}

#[test]
fn admissible_ranges() {
    assert!(NormSpec::lp(2.0, 1.0).unwrap().admissible(1));
    assert!(!NormSpec::lp(2.0, 2.0).unwrap().admissible(1));
    assert!(NormSpec::lp(4.0, 1.9).unwrap().admissible(1));
    assert!(!NormSpec::lp(1.5, 0.4).unwrap().admissible(1));
    assert!(NormSpec::new(1.0, 1.0, 0, 0).is_err());
    assert!(NormSpec::new(2.0, 1.0, 3, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_axioms(k1 in 0.5f64..6.0, k2 in 0.5f64..6.0, c in -4.0f64..4.0, p in 1.1f64..5.0, theta in 0.2f64..2.0, gamma in 0u8..3, m in -1i32..2) {
        let g = line(0.0, 1.5, 24);
        let u = trig(g.clone(), k1, 0.3);
        let v = trig(g, k2, 1.1);
        let spec = NormSpec::new(p, theta, gamma, m).unwrap();
        let nu = sobolev_norm_integer(&u, &spec).unwrap();
        let nv = sobolev_norm_integer(&v, &spec).unwrap();
        let ncu = sobolev_norm_integer(&u.scale(c), &spec).unwrap();
        prop_assert!((ncu - c.abs() * nu).abs() <= 1e-10 * (1.0 + ncu));
        let sum = sobolev_norm_integer(&u.zip_with(&v, |a, b| a + b).unwrap(), &spec).unwrap();
        prop_assert!(sum <= nu + nv + 1e-10 * (nu + nv));
    }

    #[test]
    fn bump_constants_hold(alpha in -0.95f64..6.0, t in 0.001f64..1.0, a in 0.1f64..10.0) {
        let b = bump_zeta(a, t * a, alpha);
        prop_assert!(b.is_ok(), "{:?}", b);
    }
}
