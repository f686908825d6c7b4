use super::field::CellField;
use super::level::Level;
use super::stopping::MAX_LEVELS;
use crate::error::{Error, Result};

/// `f_{|n}`: level-`n` averages copied onto the base cells of the window.
pub fn conditional_average(f: &CellField, n: i32) -> Result<CellField> {
    if n > f.n_max() {
        return Err(Error::LevelTooFine { level: n, n_max: f.n_max() });
    }
    let lv = Level::build(f, n, |v| v);
    let d1 = f.d1();
    let mut out = f.clone();
    for (cell, vals) in out.values_mut().chunks_mut(d1).enumerate() {
        let anc = lv.base_to_anc[cell];
        for (c, v) in vals.iter_mut().enumerate() {
            *v = lv.average(anc, c);
        }
    }
    Ok(out)
}

/// Number of coarser levels scanned after the window has collapsed.
const EXTRA_LEVELS: i32 = 3;

/// Dyadic maximal function `𝓜f = sup_n |f|_{|n}`, componentwise.
///
/// Once each axis of the window meets at most the cubes on either side of
/// zero, coarser cubes contain the same part of the window and their averages
/// shrink with the growing mass.
pub fn dyadic_maximal(f: &CellField) -> CellField {
    let d1 = f.d1();
    let mut run: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let update = |lv: &Level, run: &mut [f64]| -> bool {
        let mut improved = false;
        for (cell, r) in run.chunks_mut(d1).enumerate() {
            let anc = lv.base_to_anc[cell];
            for (c, v) in r.iter_mut().enumerate() {
                let a = lv.average(anc, c);
                if a > *v {
                    improved = true;
                    *v = a;
                }
            }
        }
        improved
    };
    let mut n = f.n_max();
    loop {
        let lv = Level::build(f, n, f64::abs);
        update(&lv, &mut run);
        if lv.collapsed() || f.n_max() - n >= MAX_LEVELS {
            break;
        }
        n -= 1;
    }
    for _ in 0..EXTRA_LEVELS {
        n -= 1;
        let lv = Level::build(f, n, f64::abs);
        if update(&lv, &mut run) {
            log::warn!("dyadic maximal: level {n} past the collapse level improved the supremum");
        }
    }
    let mut out = f.clone();
    out.values_mut().copy_from_slice(&run);
    out
}

/// Mean oscillation `⨍_C |f − f_C| dμ` of every cube of a level, with `f = 0`
/// off the window.
fn oscillations(f: &CellField, lv: &Level) -> Vec<f64> {
    let d1 = f.d1();
    let cell_m = f.cell_measures();
    let mut osc = vec![0.0; lv.n_cubes() * d1];
    for (cell, vals) in f.values().chunks(d1).enumerate() {
        let anc = lv.base_to_anc[cell];
        for (c, v) in vals.iter().enumerate() {
            osc[anc * d1 + c] += cell_m[cell] * (v - lv.average(anc, c)).abs();
        }
    }
    for anc in 0..lv.n_cubes() {
        let m = lv.measure(anc);
        let outside = (m - lv.inside[anc]).max(0.0);
        for c in 0..d1 {
            let o = &mut osc[anc * d1 + c];
            *o = (*o + outside * lv.average(anc, c).abs()) / m;
        }
    }
    osc
}

/// Dyadic sharp function `f^# = sup_n ⨍_{C_n} |f − f_{|n}| dμ`, componentwise.
///
/// After the window collapses, a cube `C` with `∫_{C∩W} |f| = A` has
/// oscillation at most `3A/μ(C)`; the scan stops once that bound is below the
/// smallest running value among the cells it covers.
pub fn dyadic_sharp(f: &CellField) -> CellField {
    let d1 = f.d1();
    let mut run = vec![0.0; f.values().len()];
    let update = |lv: &Level, osc: &[f64], run: &mut [f64]| {
        for (cell, r) in run.chunks_mut(d1).enumerate() {
            let anc = lv.base_to_anc[cell];
            for (c, v) in r.iter_mut().enumerate() {
                *v = v.max(osc[anc * d1 + c]);
            }
        }
    };
    let mut n = f.n_max();
    loop {
        n -= 1;
        let lv = Level::build(f, n, |v| v);
        let osc = oscillations(f, &lv);
        update(&lv, &osc, &mut run);
        if lv.collapsed() || f.n_max() - n >= MAX_LEVELS {
            break;
        }
    }
    let mut extra = 0;
    loop {
        n -= 1;
        extra += 1;
        let lv = Level::build(f, n, |v| v);
        let osc = oscillations(f, &lv);
        update(&lv, &osc, &mut run);
        if extra < EXTRA_LEVELS {
            continue;
        }
        if f.n_max() - n >= MAX_LEVELS {
            log::warn!("dyadic sharp: level cap reached");
            break;
        }
        let mass = Level::build(f, n, f64::abs);
        let mut floor = vec![f64::INFINITY; lv.n_cubes() * d1];
        for (cell, r) in run.chunks(d1).enumerate() {
            let anc = lv.base_to_anc[cell];
            for (c, v) in r.iter().enumerate() {
                let m = &mut floor[anc * d1 + c];
                *m = m.min(*v);
            }
        }
        let done = (0..lv.n_cubes()).all(|anc| {
            (0..d1).all(|c| 3.0 * mass.sums[anc * d1 + c] / lv.measure(anc) <= floor[anc * d1 + c])
        });
        if done {
            break;
        }
    }
    let mut out = f.clone();
    out.values_mut().copy_from_slice(&run);
    out
}
