//! Quasi-one-dimensional scattering of a short-range spherical potential
//! inside a cylindrical waveguide.
//!
//! The crate computes transverse mode spectra, free-space phase shifts, the
//! partial-wave T-matrix of the confined problem, effective 1D amplitudes,
//! confinement-induced resonances and confinement-induced bound states.
//!
//! Units are fixed by `ħ²/2μ = 1`: energies are squared momenta and the
//! reduced potentials `u(ρ) = 2μU/ħ²`, `v(r) = 2μV/ħ²` carry units of
//! inverse length squared.
//!
//! All numerical code is generic over a [`Real`] scalar. The aliases at the
//! crate root fix the scalar to `f64`, which is what the accuracy targets in
//! the tests assume.

pub mod confinement;
pub mod coupling;
pub mod error;
pub mod freescatt;
pub mod interp;
pub mod linalg;
pub mod quadrature;
pub mod solver;
pub mod specfun;

mod scalar;

pub use error::{Error, Result};
pub use scalar::{lit, Real};

pub use confinement::{ConfinementModel, HardWallVariant};
pub use freescatt::PhaseShifts;
pub use solver::{Parity, Sector};

/// Complex number over `f64`.
pub type Complex64 = num_complex::Complex<f64>;

pub type ModeSet = confinement::ModeSet<f64>;
pub type ChannelDecomposition = confinement::ChannelDecomposition<f64>;
pub type RadialPotential = freescatt::RadialPotential<f64>;
pub type PhaseShiftTable = freescatt::PhaseShiftTable<f64>;
pub type LowEnergyPhaseShifts = freescatt::LowEnergyPhaseShifts<f64>;
pub type CouplingContext<'a> = coupling::CouplingContext<'a, f64>;
pub type TSolution = solver::TSolution<f64>;
pub type Amplitudes = solver::Amplitudes<f64>;
pub type BoundState = solver::BoundState<f64>;
pub type PoleResult = solver::PoleResult<f64>;
pub type PotentialPhaseShifts = freescatt::PotentialPhaseShifts<f64>;

/// Single-precision variants. Accuracy floors scale with `f32::EPSILON`.
pub type ModeSetF32 = confinement::ModeSet<f32>;
pub type BoundStateF32 = solver::BoundState<f32>;
