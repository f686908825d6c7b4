//! Deterministic test corpora: random cell fields, continuum fields that can
//! be sampled at several resolutions, Lipschitz fields, smooth fields on
//! Poincaré boxes and caloric fields of the backward heat system.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{CellField, Window};
use crate::error::Result;
use crate::measure::WeightParams;
use crate::solver::SystemCoefficients;

/// Generator for item `index` of a corpus drawn from `seed`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Nonnegative random field on a small window, `d ∈ {1, 2}`, with zero cells
/// and occasional spikes.
pub fn random_cellfield(rng: &mut ChaCha8Rng, d: usize, alpha: f64) -> Result<CellField> {
    let n_max = rng.random_range(-1..=2);
    let mut lo = vec![rng.random_range(-4..4), rng.random_range(0..4)];
    let mut hi = vec![lo[0] + rng.random_range(1..9), lo[1] + rng.random_range(1..6)];
    for _ in 1..d {
        let l = rng.random_range(-3..2);
        lo.push(l);
        hi.push(l + rng.random_range(1..5));
    }
    let window = Window::new(lo, hi)?;
    CellField::from_fn(1, WeightParams::new(alpha)?, n_max, window, |_| {
        let u: f64 = rng.random();
        vec![if u < 0.3 {
            0.0
        } else if u < 0.4 {
            rng.random_range(10.0..50.0)
        } else {
            rng.random_range(0.0..4.0)
        }]
    })
}

/// A field on `[0, t_len) × [0, x_len) × [−w, w)^{d−1}`: a sum of constants on
/// axis boxes with endpoints on the unit lattice of level `base` plus
/// Gaussian bumps. Sampling it at any level `≥ base` refines the same
/// function.
#[derive(Debug, Clone)]
pub struct ContinuumField {
    pub d: usize,
    pub base: i32,
    pub extent: (f64, f64, f64),
    pub plateaus: Vec<(Vec<f64>, Vec<f64>, f64)>,
    pub bumps: Vec<(Vec<f64>, f64, f64)>,
}

impl ContinuumField {
    pub fn random(rng: &mut ChaCha8Rng, d: usize, base: i32) -> Self {
        let (t_len, x_len, w) = if d == 1 { (1.0, 2.0, 0.0) } else { (1.0, 1.0, 0.5) };
        let ts = 4f64.powi(-base);
        let xs = 2f64.powi(-base);
        let snap = |v: f64, s: f64| (v / s).round() * s;
        let mut plateaus = Vec::new();
        for _ in 0..rng.random_range(1..4) {
            let mut lo = vec![snap(rng.random_range(0.0..0.7 * t_len), ts), snap(rng.random_range(0.0..0.7 * x_len), xs)];
            let mut hi = vec![lo[0] + ts * rng.random_range(1..4) as f64, lo[1] + xs * rng.random_range(1..3) as f64];
            for _ in 1..d {
                let l = snap(rng.random_range(-w..0.5 * w), xs);
                lo.push(l);
                hi.push(l + xs);
            }
            for k in 0..hi.len() {
                let cap = [t_len, x_len, w][k.min(2)];
                hi[k] = hi[k].min(cap);
            }
            plateaus.push((lo, hi, rng.random_range(-2.0..4.0)));
        }
        let mut bumps = Vec::new();
        for _ in 0..rng.random_range(0..3) {
            let mut c = vec![rng.random_range(0.2..0.8) * t_len, rng.random_range(0.2..0.8) * x_len];
            for _ in 1..d {
                c.push(rng.random_range(-0.5..0.5) * w);
            }
            bumps.push((c, rng.random_range(0.05..0.2), rng.random_range(-3.0..3.0)));
        }
        ContinuumField { d, base, extent: (t_len, x_len, w), plateaus, bumps }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let mut v = 0.0;
        for (lo, hi, c) in &self.plateaus {
            if (0..p.len()).all(|k| lo[k] <= p[k] && p[k] < hi[k]) {
                v += c;
            }
        }
        for (c, width, amp) in &self.bumps {
            let r2: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            v += amp * (-r2 / (2.0 * width * width)).exp();
        }
        v
    }

    /// The field sampled at cell centres on level `n_max ≥ base`.
    pub fn cellfield(&self, n_max: i32, alpha: f64) -> Result<CellField> {
        let ts = 4f64.powi(-n_max);
        let xs = 2f64.powi(-n_max);
        let (t_len, x_len, w) = self.extent;
        let mut lo = vec![0, 0];
        let mut hi = vec![(t_len / ts).round() as i64, (x_len / xs).round() as i64];
        for _ in 1..self.d {
            lo.push(-(w / xs).round() as i64);
            hi.push((w / xs).round() as i64);
        }
        let window = Window::new(lo, hi)?;
        CellField::from_fn(1, WeightParams::new(alpha)?, n_max, window, |idx| {
            let mut p = vec![(idx[0] as f64 + 0.5) * ts];
            p.extend(idx[1..].iter().map(|i| (*i as f64 + 0.5) * xs));
            vec![self.eval(&p)]
        })
    }
}

/// `Σ a_k sin(ω_k·(t, x) + φ_k)` and its Euclidean Lipschitz constant.
#[derive(Debug, Clone)]
pub struct LipschitzField {
    pub modes: Vec<(f64, Vec<f64>, f64)>,
    pub lipschitz: f64,
}

impl LipschitzField {
    pub fn random(rng: &mut ChaCha8Rng, d: usize) -> Self {
        let modes: Vec<(f64, Vec<f64>, f64)> = (0..rng.random_range(1..5))
            .map(|_| {
                let omega = (0..=d).map(|_| rng.random_range(-6.0..6.0)).collect();
                (rng.random_range(-2.0..2.0), omega, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        let lipschitz = modes.iter().map(|(a, w, _)| a.abs() * w.iter().map(|v| v * v).sum::<f64>().sqrt()).sum();
        LipschitzField { modes, lipschitz }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.modes.iter().map(|(a, w, ph)| a * (w.iter().zip(p).map(|(u, v)| u * v).sum::<f64>() + ph).sin()).sum()
    }

    /// Values at the centres of the level-`n_max` cells of `window`.
    pub fn cellfield(&self, n_max: i32, alpha: f64, window: Window) -> Result<CellField> {
        let ts = 4f64.powi(-n_max);
        let xs = 2f64.powi(-n_max);
        CellField::from_fn(1, WeightParams::new(alpha)?, n_max, window, |idx| {
            let mut p = vec![(idx[0] as f64 + 0.5) * ts];
            p.extend(idx[1..].iter().map(|i| (*i as f64 + 0.5) * xs));
            vec![self.eval(&p)]
        })
    }
}

/// A smooth spatial function with its gradient: a random trigonometric
/// polynomial plus a random quadratic.
#[derive(Debug, Clone)]
pub struct SmoothField {
    pub modes: Vec<(f64, Vec<f64>, f64)>,
    pub quadratic: Vec<f64>,
}

impl SmoothField {
    pub fn random(rng: &mut ChaCha8Rng, d: usize) -> Self {
        let modes = (0..rng.random_range(1..4))
            .map(|_| {
                let omega = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
                (rng.random_range(-1.0..1.0), omega, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        let quadratic = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
        SmoothField { modes, quadratic }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let trig: f64 = self.modes.iter().map(|(a, w, ph)| a * (w.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + ph).sin()).sum();
        trig + self.quadratic.iter().zip(x).map(|(q, v)| q * v * v).sum::<f64>()
    }
}

/// A closed-form solution of the backward system `u_t + A u_xx = 0` in one
/// space dimension.
#[derive(Clone)]
pub struct CaloricField {
    pub name: &'static str,
    pub coeffs: SystemCoefficients,
    pub value: fn(f64, f64) -> Vec<f64>,
    /// `u_xx` in closed form.
    pub second: fn(f64, f64) -> Vec<f64>,
}

impl std::fmt::Debug for CaloricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaloricField").field("name", &self.name).finish()
    }
}

fn scalar(a: f64) -> SystemCoefficients {
    SystemCoefficients::constant(&vec![vec![vec![vec![a]]]]).expect("scalar coefficients")
}

/// Backward caloric fields. `linear` and `quadratic` are the degenerate
/// members: `u_xx ≡ 0` and `u_xx ≡ 2`.
pub fn caloric_corpus() -> Vec<CaloricField> {
    let coupled = SystemCoefficients::constant(&vec![vec![vec![vec![2.0, 0.5], vec![0.0, 2.0]]]]).expect("coupled coefficients");
    vec![
        CaloricField { name: "linear", coeffs: scalar(1.0), value: |_, x| vec![x], second: |_, _| vec![0.0] },
        CaloricField { name: "quadratic", coeffs: scalar(1.0), value: |t, x| vec![x * x - 2.0 * t], second: |_, _| vec![2.0] },
        CaloricField { name: "cubic", coeffs: scalar(1.0), value: |t, x| vec![x.powi(3) - 6.0 * x * t], second: |_, x| vec![6.0 * x] },
        CaloricField {
            name: "quartic",
            coeffs: scalar(1.0),
            value: |t, x| vec![x.powi(4) - 12.0 * x * x * t + 12.0 * t * t],
            second: |t, x| vec![12.0 * x * x - 24.0 * t],
        },
        CaloricField { name: "exponential", coeffs: scalar(1.0), value: |t, x| vec![(x - t).exp()], second: |t, x| vec![(x - t).exp()] },
        CaloricField {
            name: "coupled",
            coeffs: coupled,
            value: |t, x| vec![x.powi(3) - 15.0 * x * t, x.powi(3) - 12.0 * x * t],
            second: |_, x| vec![6.0 * x, 6.0 * x],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caloric_fields_solve_the_backward_system() {
        let h = 1e-3;
        for field in caloric_corpus() {
            for (t, x) in [(0.1, 0.5), (0.7, 1.3), (2.0, 3.0)] {
                let u = |t: f64, x: f64| (field.value)(t, x);
                let ut: Vec<f64> = u(t + h, x).iter().zip(u(t - h, x)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                let uxx = (field.second)(t, x);
                let fd: Vec<f64> = (0..uxx.len()).map(|k| (u(t, x + h)[k] - 2.0 * u(t, x)[k] + u(t, x - h)[k]) / (h * h)).collect();
                for k in 0..uxx.len() {
                    assert!((fd[k] - uxx[k]).abs() < 1e-4 * (1.0 + uxx[k].abs()), "{}", field.name);
                    let mut a_uxx = 0.0;
                    for r in 0..uxx.len() {
                        a_uxx += field.coeffs.entry(0, 0, 0, k, r) * uxx[r];
                    }
                    assert!((ut[k] + a_uxx).abs() < 1e-5 * (1.0 + a_uxx.abs()), "{}", field.name);
                }
            }
        }
    }

    #[test]
    fn continuum_fields_refine() {
        let mut rng = rng_for(3, 0);
        let f = ContinuumField::random(&mut rng, 2, 0);
        let a = f.cellfield(1, 0.0).unwrap();
        let b = f.cellfield(2, 0.0).unwrap();
        assert_eq!(b.values().len(), a.values().len() * 16);
        let l = LipschitzField::random(&mut rng, 1);
        assert!(l.lipschitz > 0.0);
    }
}
