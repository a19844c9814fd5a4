//! Pseudo-spectral laboratory for the mSQG family of active scalar equations
//! on the 2-torus.
//!
//! The crate provides, at desk scale:
//!
//! * exact-convention Littlewood-Paley projections and Fourier multiplier
//!   application on `[0, 2π)²` ([`lp`], [`field`], [`multiplier`]),
//! * homogeneous Sobolev / Besov / Hessian norms ([`spaces`]),
//! * the mSQG Biot-Savart operator, weak bilinear and trilinear forms, a
//!   four-way low/high paraproduct split and truncated Hamiltonian flux
//!   diagnostics ([`ops`]),
//! * the bilinear anti-divergence kernel obtained by Taylor expansion of the
//!   multiplier in frequency space, the trace-free double-divergence form of
//!   the nonlinearity, and windowed moment diagnostics ([`antidiv`]),
//! * a dealiased RK4 integrator with conservation diagnostics ([`solver`]),
//! * geometric-optics wave packets and the limit functionals that single the
//!   mSQG multiplier out among homogeneous symbols ([`packets`]).
//!
//! All physical-space grids are `n × n` with `n` a power of two and period
//! `2π`, so lattice wavenumbers are integers and dyadic frequency bands are
//! exact.

pub mod antidiv;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod lp;
pub mod multiplier;
pub mod ops;
pub mod packets;
pub mod quadrature;
pub mod solver;
pub mod spaces;

pub use error::Error;
pub use field::{Rank, SpectralField};
pub use grid::Grid;
pub use lp::{LpProfile, Projection};
pub use multiplier::{AngularProfile, MultiplierFamily, MultiplierSpec};

/// Complex scalar used throughout (re-export of the rustfft type).
pub type Complex = rustfft::num_complex::Complex<f64>;

/// Result alias for fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;
