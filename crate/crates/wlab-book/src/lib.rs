//! Every chapter of the guide in `book/src` is a module here, so its code
//! blocks run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/measure.md")]
pub mod measure {}

#[doc = include_str!("../../../book/src/dyadic.md")]
pub mod dyadic {}

#[doc = include_str!("../../../book/src/boxes.md")]
pub mod boxes {}

#[doc = include_str!("../../../book/src/sobolev.md")]
pub mod sobolev {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/kernel.md")]
pub mod kernel {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
