//! Dyadic filtrations of the space-time half space and the operators built on
//! them.
//!
//! Level-`n` cubes have time side `4^{-n}` and spatial side `2^{-n}`. Fields are
//! piecewise constant on the finest level `n_max`, so averages, stopping
//! times, the Calderón–Zygmund splitting and the dyadic maximal and sharp
//! functions are all computed exactly from closed-form cube masses.

mod cube;
mod field;
mod level;
mod operators;
mod stopping;
mod window;

pub use cube::{
    cube_measure, locate_cube, parent, parent_ratio, parent_ratio_bound, ParabolicCube, SpatialCell,
};
pub use field::CellField;
pub use operators::{conditional_average, dyadic_maximal, dyadic_sharp};
pub use stopping::{build_stopping_time, cz_decompose, stopped_field, CzDecomposition, StoppingTimeMap};
pub use window::Window;

pub(crate) use window::{for_each_index, strides};

#[cfg(test)]
mod tests;
