//! Scattering analysis for one-dimensional non-Hermitian tight-binding
//! chains.
//!
//! A two-site scattering center sits between two uniform leads. The crate
//! computes the stationary reflection/transmission amplitudes of that
//! arrangement in closed form and by direct linear solve, locates the poles
//! of the scattering matrix in the complex wave-number plane, performs a
//! biorthogonal eigenanalysis of the truncated lattice, and propagates
//! Gaussian wave packets in time so that stationary predictions can be
//! checked against actual dynamics.
//!
//! Units: `hbar = J = a = 1`, where `J` is the lead hopping strength and `a`
//! the lattice constant. Energies are in units of `J`, times in `hbar/J`,
//! wave numbers in `1/a`.

pub mod analysis;
mod assign;
pub mod dynamics;
pub mod error;
mod linfit;
pub mod model;
pub mod poles;
pub mod scattering;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{
    build_center, build_finite_hamiltonian, dispersion, CenterModel, Hamiltonian, LatticeSpec,
    ModelFamily,
};

use num_complex::Complex;

/// Real scalar the numerics are generic over (`f32` or `f64`).
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + faer::traits::RealField
    + std::fmt::Display
    + std::fmt::LowerExp
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` constant into the working scalar type.
pub(crate) fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in the scalar type")
}

/// Double-precision complex number.
pub type C64 = Complex<f64>;
/// Double-precision scattering center.
pub type CenterModel64 = model::CenterModel<f64>;
/// Double-precision amplitude set.
pub type Amplitudes64 = scattering::Amplitudes<f64>;
/// Double-precision S-matrix pole.
pub type Pole64 = poles::Pole<f64>;
