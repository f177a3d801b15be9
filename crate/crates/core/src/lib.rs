//! Well-balanced finite-volume solver for quasi-one-dimensional compressible
//! flow through a nozzle whose cross-section may jump.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod cli;
pub mod diagnostics;
pub mod eos;
pub mod report;
pub mod runner;
pub mod scheme;
pub mod states;
pub mod stationary;

pub use eos::{EosError, GasModel};
pub use scheme::{RunState, SchemeConfig, SchemeKind};
pub use states::{CellState, Conserved, PrimitiveState, RegionTag};
