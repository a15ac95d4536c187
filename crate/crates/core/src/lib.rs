//! Numerical toolkit for quantum mechanics in which time is a coordinate
//! operator on the same footing as space.
//!
//! Wave functions live in four dimensions `(t, x, y, z)` and evolve in a
//! separate classical laboratory time `τ`. The crate provides closed-form
//! Gaussian evolution, analytic and semiclassical kernels, a time-sliced
//! path integral, a grid evolver for the four dimensional Schrödinger
//! equation, a Morlet wavelet transform and closed-form calculators for
//! slit-in-time experiments.
//!
//! Natural units (ħ = c = 1) and the metric signature (+, −, −, −) are used
//! throughout.

// Negated comparisons reject NaN on purpose; index loops mirror stencil math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod bound;
pub mod error;
pub mod experiments;
pub mod foundation;
pub mod grid;
pub mod kernels;
pub mod morlet;
pub mod par;
pub mod pathint;
pub mod schrodinger;
pub mod wavepackets;

pub use error::{Error, Result};
pub use foundation::{FourMomentum, FourVector, C64};
