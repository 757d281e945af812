//! Spectral laboratory for the 3D incompressible magneto-micropolar system.
//!
//! The crate evolves `z = (u, w, b)` on a periodic box with a pseudo-spectral
//! exponential integrator, evolves the linearized system exactly (on the box
//! and on a continuum radial quadrature of Fourier space), estimates the
//! decay character of initial data and fits algebraic decay exponents.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod analysis;
pub mod config;
pub mod decay_character;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod linear;
pub mod quadrature;
pub mod selftest;
pub mod solver;
pub mod symbol;

pub use error::{Error, Result};
pub use field::{PhysParams, StateField, VectorField};
pub use grid::Grid;
