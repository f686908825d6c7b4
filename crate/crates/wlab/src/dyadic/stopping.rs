use std::collections::BTreeMap;

use super::field::CellField;
use super::level::Level;
use super::window::Window;
use crate::error::{Error, Result};

/// Hard limit on the number of levels scanned below the base resolution.
pub(crate) const MAX_LEVELS: i32 = 200;

/// A level-valued map on base cells; `None` stands for `τ = ∞`.
///
/// The window covers every cube on which `τ` is finite, so it may be larger
/// than the window of the field it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingTimeMap {
    n_max: i32,
    floor: i32,
    window: Window,
    values: Vec<Option<i32>>,
}

impl StoppingTimeMap {
    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    /// Coarsest level scanned; `τ > floor` wherever it is finite.
    pub fn floor(&self) -> i32 {
        self.floor
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[Option<i32>] {
        &self.values
    }

    /// `τ` at a base cell; `None` (infinite) outside the window.
    pub fn get(&self, idx: &[i64]) -> Option<i32> {
        self.window.flat(idx).and_then(|f| self.values[f])
    }

    /// Checks that each level set `{τ = n}` is a union of level-`n` cubes.
    pub fn is_measurable(&self) -> bool {
        for idx in self.window.iter() {
            let Some(n) = self.get(&idx) else { continue };
            let k = (self.n_max - n) as u32;
            let cube_lo: Vec<i64> = idx
                .iter()
                .enumerate()
                .map(|(a, &i)| {
                    let s = if a == 0 { 2 * k } else { k };
                    (i >> s) << s
                })
                .collect();
            let cube_hi: Vec<i64> = cube_lo
                .iter()
                .enumerate()
                .map(|(a, &l)| l + (1i64 << if a == 0 { 2 * k } else { k }))
                .collect();
            let Ok(cube) = Window::new(cube_lo, cube_hi) else { return false };
            if !self.window.contains_window(&cube) || cube.iter().any(|j| self.get(&j) != Some(n)) {
                return false;
            }
        }
        true
    }
}

/// `τ(t,x) = inf{n : g_{|n}(t,x) > λ}` for a nonnegative scalar field.
///
/// The per-level maximum of the averages is non-increasing towards coarser
/// levels, so the scan stops at the first level where it drops to `λ` and the
/// result is exact.
pub fn build_stopping_time(g: &CellField, lambda: f64) -> Result<StoppingTimeMap> {
    if g.d1() != 1 {
        return Err(Error::Dimension("stopping times need a scalar field".into()));
    }
    if g.values().iter().any(|v| *v < 0.0) {
        return Err(Error::Domain("stopping times need a nonnegative field".into()));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let n_max = g.n_max();
    let mut levels = Vec::new();
    let mut n = n_max;
    let floor = loop {
        let lv = Level::build(g, n, |v| v);
        let max_avg = (0..lv.n_cubes()).map(|a| lv.average(a, 0)).fold(0.0, f64::max);
        if max_avg <= lambda {
            break n;
        }
        levels.push(lv);
        n -= 1;
        if n_max - n > MAX_LEVELS {
            return Err(Error::Domain("stopping-time scan did not terminate".into()));
        }
    };
    // Coarsest first, so the first level that fires is the infimum.
    levels.reverse();

    let base = g.window();
    let mut window = base.clone();
    let mut seen = BTreeMap::new();
    for cell in 0..base.len() {
        for lv in &levels {
            let anc = lv.base_to_anc[cell];
            if lv.average(anc, 0) > lambda {
                seen.entry((lv.level, anc)).or_insert_with(|| {
                    let (lo, hi) = lv.base_extent(anc);
                    window = window.hull(&Window::new(lo, hi).expect("cube extent"));
                });
                break;
            }
        }
    }

    let values = window
        .iter()
        .map(|idx| {
            levels.iter().find_map(|lv| match lv.locate(&idx) {
                Some(anc) if lv.average(anc, 0) > lambda => Some(lv.level),
                _ => None,
            })
        })
        .collect();
    Ok(StoppingTimeMap { n_max, floor, window, values })
}

/// `g_{|τ}`: the level-`τ` average where `τ` is finite, `g` elsewhere.
///
/// The result lives on the window of `tau`, which must contain the window of `g`.
pub fn stopped_field(g: &CellField, tau: &StoppingTimeMap) -> Result<CellField> {
    if g.n_max() != tau.n_max() {
        return Err(Error::WindowMismatch(format!(
            "base resolutions differ: {} vs {}",
            g.n_max(),
            tau.n_max()
        )));
    }
    let mut out = g.pad_to(tau.window())?;
    let mut levels: BTreeMap<i32, Level> = BTreeMap::new();
    for n in tau.values().iter().flatten() {
        levels.entry(*n).or_insert_with(|| Level::build(g, *n, |v| v));
    }
    let d1 = g.d1();
    for (f, idx) in tau.window().iter().enumerate() {
        let Some(n) = tau.values()[f] else { continue };
        let lv = &levels[&n];
        let vals = &mut out.values_mut()[f * d1..(f + 1) * d1];
        match lv.locate(&idx) {
            Some(anc) => {
                for (c, v) in vals.iter_mut().enumerate() {
                    *v = lv.average(anc, c);
                }
            }
            None => vals.iter_mut().for_each(|v| *v = 0.0),
        }
    }
    Ok(out)
}

/// The Calderón–Zygmund splitting `g = ξ + η` at height `λ`.
#[derive(Debug, Clone)]
pub struct CzDecomposition {
    /// `g − g_{|τ}`, with vanishing averages on every stopped cube.
    pub xi: CellField,
    /// `g_{|τ}`, bounded by `N₀λ` on `{τ < ∞}`.
    pub eta: CellField,
    pub tau: StoppingTimeMap,
}

pub fn cz_decompose(g: &CellField, lambda: f64) -> Result<CzDecomposition> {
    let tau = build_stopping_time(g, lambda)?;
    let eta = stopped_field(g, &tau)?;
    let xi = g.pad_to(tau.window())?.zip_with(&eta, |a, b| a - b)?;
    Ok(CzDecomposition { xi, eta, tau })
}
