//! Power weights on the half space.
//!
//! The spatial measure is `ν_α(dx) = (x¹)^α dx` and the space-time measure is
//! `μ_α = ν_α × dt`. Every mass is evaluated through the antiderivative
//! `φ(x) / (α + 1)` with `φ(x) = x^{α+1}`, never by quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The exponent `α > −1` of the weight `(x¹)^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WeightParams {
    alpha: f64,
}

impl WeightParams {
    /// Fails unless `alpha` is finite and greater than −1.
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > -1.0 {
            Ok(Self { alpha })
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    /// The weight used by the estimates in `L_{p,θ}`: `α = θ − d + p`.
    pub fn from_theta(theta: f64, d: usize, p: f64) -> Result<Self> {
        Self::new(theta - d as f64 + p)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α + 1`, the exponent of `φ`.
    pub fn exponent(&self) -> f64 {
        self.alpha + 1.0
    }
}

impl TryFrom<f64> for WeightParams {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<WeightParams> for f64 {
    fn from(w: WeightParams) -> f64 {
        w.alpha
    }
}

/// A bounded interval `[lo, hi]` of the closed half line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineInterval {
    lo: f64,
    hi: f64,
}

impl HalfLineInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// `φ(x) = x^{α+1}` for `x > 0`.
pub fn phi(x: f64, params: WeightParams) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("phi needs x > 0, got {x}")));
    }
    Ok(x.powf(params.exponent()))
}

/// `∫_lo^hi x^α dx` in closed form.
pub fn interval_weight(iv: HalfLineInterval, params: WeightParams) -> f64 {
    weight_between(iv.lo, iv.hi, params)
}

/// Unchecked form of [`interval_weight`] for `0 ≤ lo ≤ hi`; returns 0 when
/// `lo == hi`.
pub(crate) fn weight_between(lo: f64, hi: f64, params: WeightParams) -> f64 {
    debug_assert!(0.0 <= lo && lo <= hi, "bad interval [{lo}, {hi}]");
    if lo >= hi {
        return 0.0;
    }
    let alpha = params.alpha;
    if alpha == 0.0 {
        return hi - lo;
    }
    let a = params.exponent();
    if lo == 0.0 {
        return hi.powf(a) / a;
    }
    if hi < 2.0 * lo {
        // φ(hi) − φ(lo) = φ(lo)·expm1(a·ln(hi/lo)) avoids the cancellation.
        let ratio_log = ((hi - lo) / lo).ln_1p();
        lo.powf(a) * (a * ratio_log).exp_m1() / a
    } else {
        (hi.powf(a) - lo.powf(a)) / a
    }
}

/// ν-mass of `[lo, hi] × (cross-section of Lebesgue volume transverse_volume)`.
pub fn box_measure_nu(iv: HalfLineInterval, transverse_volume: f64, params: WeightParams) -> f64 {
    debug_assert!(transverse_volume >= 0.0);
    interval_weight(iv, params) * transverse_volume
}

/// μ-mass of a space-time box: `time_length × box_measure_nu`.
pub fn box_measure_mu(
    time_length: f64,
    iv: HalfLineInterval,
    transverse_volume: f64,
    params: WeightParams,
) -> f64 {
    debug_assert!(time_length >= 0.0);
    time_length * box_measure_nu(iv, transverse_volume, params)
}

/// `(φ(x+2r) − φ(x+r)) / (φ(x+r) − φ(x))`, which never exceeds `2^{α+1}`.
pub fn phi_ratio(x: f64, r: f64, params: WeightParams) -> Result<f64> {
    if !(x > 0.0) || !(r > 0.0) || !x.is_finite() || !r.is_finite() {
        return Err(Error::Domain(format!("phi_ratio needs x, r > 0, got ({x}, {r})")));
    }
    Ok(weight_between(x + r, x + 2.0 * r, params) / weight_between(x, x + r, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: f64) -> WeightParams {
        WeightParams::new(a).unwrap()
    }

    fn iv(lo: f64, hi: f64) -> HalfLineInterval {
        HalfLineInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WeightParams::new(-1.0).is_err());
        assert!(WeightParams::new(f64::NAN).is_err());
        assert!(HalfLineInterval::new(2.0, 1.0).is_err());
        assert!(HalfLineInterval::new(-0.5, 1.0).is_err());
        assert!(phi(0.0, w(1.0)).is_err());
        assert!(phi_ratio(0.0, 1.0, w(1.0)).is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(2.0, w(1.0)).unwrap(), 4.0);
        assert_eq!(phi(1.0, w(-0.5)).unwrap(), 1.0);
        assert!((phi(4.0, w(0.5)).unwrap() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn interval_weights() {
        assert_eq!(interval_weight(iv(1.0, 3.0), w(0.0)), 2.0);
        assert!((interval_weight(iv(0.0, 2.0), w(1.0)) - 2.0).abs() < 1e-15);
        assert!((interval_weight(iv(0.0, 1.0), w(-0.5)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn box_measures() {
        assert!((box_measure_nu(iv(0.0, 1.0), 1.0, w(1.0)) - 0.5).abs() < 1e-15);
        assert_eq!(box_measure_nu(iv(1.0, 2.0), 4.0, w(0.0)), 4.0);
        assert!((box_measure_nu(iv(0.0, 2.0), 0.5, w(2.0)) - 4.0 / 3.0).abs() < 1e-15);
        assert!((box_measure_mu(1.0, iv(0.0, 1.0), 1.0, w(1.0)) - 0.5).abs() < 1e-15);
        assert!((box_measure_mu(4.0, iv(0.0, 2.0), 1.0, w(1.0)) - 8.0).abs() < 1e-14);
        assert_eq!(box_measure_mu(0.25, iv(1.0, 3.0), 2.0, w(0.0)), 1.0);
    }

    #[test]
    fn phi_ratio_values() {
        assert_eq!(phi_ratio(1.0, 1.0, w(0.0)).unwrap(), 1.0);
        assert!((phi_ratio(1.0, 1.0, w(1.0)).unwrap() - 5.0 / 3.0).abs() < 1e-14);
        // (2x + 3r)/(2x + r) → 3 as x → 0.
        let near_zero = phi_ratio(1e-12, 1.0, w(1.0)).unwrap();
        assert!((near_zero - 3.0).abs() < 1e-9);
    }

    #[test]
    fn thin_intervals_near_minus_one() {
        let p = w(-0.999);
        let lo: f64 = 3.0;
        let hi = lo * (1.0 + 1e-9);
        // Midpoint rule is accurate to O(width³) on such a thin interval.
        let mid: f64 = 0.5 * (lo + hi);
        let reference = (hi - lo) * mid.powf(-0.999);
        let got = interval_weight(iv(lo, hi), p);
        assert!(((got - reference) / reference).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const ALPHAS: [f64; 7] = [-0.9, -0.5, 0.0, 0.5, 1.0, 2.7, 5.0];

        proptest! {
            #[test]
            fn phi_ratio_bounded(x in 1e-9f64..100.0, r in 1e-9f64..100.0, k in 0usize..7) {
                let p = w(ALPHAS[k]);
                let bound = 2f64.powf(p.exponent());
                prop_assert!(phi_ratio(x, r, p).unwrap() <= bound * (1.0 + 1e-12));
            }

            #[test]
            fn additive(a in 0.0f64..10.0, d1 in 1e-9f64..10.0, d2 in 1e-9f64..10.0, k in 0usize..7) {
                let p = w(ALPHAS[k]);
                let (b, c) = (a + d1, a + d1 + d2);
                let whole = interval_weight(iv(a, c), p);
                let parts = interval_weight(iv(a, b), p) + interval_weight(iv(b, c), p);
                prop_assert!((whole - parts).abs() <= 1e-12 * whole);
            }

            #[test]
            fn lebesgue_is_exact(lo in 0.0f64..50.0, len in 1e-6f64..50.0) {
                let hi = lo + len;
                prop_assert_eq!(interval_weight(iv(lo, hi), w(0.0)), hi - lo);
            }

            #[test]
            fn dilation_covariant(lo in 0.0f64..10.0, len in 1e-6f64..10.0, c in 0.01f64..100.0, k in 0usize..7) {
                let p = w(ALPHAS[k]);
                let base = interval_weight(iv(lo, lo + len), p);
                let scaled = interval_weight(iv(c * lo, c * (lo + len)), p);
                prop_assert!((scaled - c.powf(p.exponent()) * base).abs() <= 1e-12 * scaled);
            }
        }
    }
}
