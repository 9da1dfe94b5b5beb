//! Numerical laboratory for discrete and continuum Schrödinger operators with
//! few bound states.
//!
//! The crate is organised around a handful of modules:
//!
//! - [`lattice`]: potentials, tridiagonal truncations, 2D lattice windows and
//!   quadratic forms.
//! - [`eigen`]: Sturm counting, bisection, inverse iteration, Lanczos and a
//!   dense oracle.
//! - [`wvn`]: the Wigner–von Neumann type example with a zero-energy
//!   eigenvalue and geometrically decaying bound states.
//! - [`dynamics`]: transfer recursion and envelope growth diagnostics.
//! - [`variational`]: ground-state identities, cutoff energies and the
//!   criticality certificate search.
//! - [`quadrature`] and [`report`]: Simpson/Gauss–Legendre rules and the
//!   CSV/JSON table writer.
//! - [`acceptance`]: the numbered acceptance checks, shared by the test suite
//!   and the command-line front end.
//!
//! All numerical code is generic over [`Real`]; the `*F64` aliases below name
//! the double-precision instantiations used by the CLI.

// the `!(a < b)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dynamics;
pub mod eigen;
mod error;
mod fit;
pub mod lattice;
pub mod quadrature;
pub mod report;
mod scalar;
pub mod variational;
pub mod wvn;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PotentialF64 = lattice::Potential<f64>;
pub type Potential2dF64 = lattice::Potential2d<f64>;
pub type TridiagonalSystemF64 = lattice::TridiagonalSystem<f64>;
pub type BoundStateListF64 = eigen::BoundStateList<f64>;
pub type GrowthFitF64 = eigen::GrowthFit<f64>;
pub type WvnPairF64 = wvn::WvnPair<f64>;
pub type ComparisonSetF64 = wvn::ComparisonSet<f64>;
pub type TransferTrajectoryF64 = dynamics::TransferTrajectory<f64>;
pub type GroundStateModelF64 = variational::GroundStateModel<f64>;
pub type CutoffProfileF64 = variational::CutoffProfile<f64>;
pub type CertificateF64 = variational::Certificate<f64>;

pub type PotentialF32 = lattice::Potential<f32>;
pub type TridiagonalSystemF32 = lattice::TridiagonalSystem<f32>;
