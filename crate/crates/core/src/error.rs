//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in the toolkit. Diagnostic payloads are kept
/// as `f64`/`usize` regardless of the working scalar type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice must have an even number of sites, at least 4 (got {sites})")]
    InvalidLattice { sites: usize },

    #[error("lattice size {sites} exceeds the dense eigensolver cap of {cap}")]
    LatticeTooLarge { sites: usize, cap: usize },

    #[error("wave number must lie in [0, pi] (got {k})")]
    WaveNumberOutOfRange { k: f64 },

    #[error("amplitudes divergent at real k = {k}: |denominator| = {denom:.3e} indicates a spectral singularity")]
    DivergentAmplitudes { k: f64, denom: f64 },

    #[error("scattering linear system is near-singular (condition estimate {cond:.3e})")]
    NearSingularSystem { cond: f64 },

    #[error("solver window must span at least {min} sites (got {got})")]
    WindowTooSmall { got: usize, min: usize },

    #[error("poles run off to -i*infinity at {parameter} = {value}")]
    PolesAtInfinity { parameter: &'static str, value: f64 },

    #[error("pole polynomial degree collapsed: expected {nominal} roots, found {found}")]
    DegreeCollapse { nominal: usize, found: usize },

    #[error("no critical point in the sweep range [{lo}, {hi}]")]
    NoCriticalPoint { lo: f64, hi: f64 },

    #[error("eigensolver failed to converge")]
    EigensolverFailed,

    #[error("spectrum is flagged as near an exceptional point (min overlap {min_overlap:.3e}); use the stepper propagator instead")]
    NearExceptionalPoint { min_overlap: f64 },

    #[error("packet center {j0} lies outside the lattice")]
    PacketOutsideLattice { j0: i64 },

    #[error("packet half-width must be positive (got {sigma})")]
    InvalidPacketWidth { sigma: f64 },

    #[error("recorded times must be non-negative and strictly ascending")]
    InvalidTimes,

    #[error("time {t} is not among the recorded times")]
    TimeNotRecorded { t: f64 },

    #[error("time step {dt} exceeds the stability bound {max_dt:.3e}")]
    TimeStepTooLarge { dt: f64, max_dt: f64 },

    #[error("instability at step {step}: norm grew by a factor of {ratio:.3e} in one step; reduce the time step")]
    Instability { step: usize, ratio: f64 },

    #[error("fit window [{lo}, {hi}] does not select enough recorded points")]
    InvalidWindow { lo: f64, hi: f64 },

    #[error("total intensity is not positive inside the fit window")]
    IntensityNotPositive,

    #[error("fit quality too low (R^2 = {r2})")]
    FitQuality { r2: f64 },

    #[error("profile not localized")]
    NotLocalized,

    #[error("finite-size scaling needs at least 3 lattice sizes (got {got})")]
    TooFewSizes { got: usize },

    #[error("lattice sizes must be strictly ascending")]
    SizesNotAscending,

    #[error("sweep grid is empty")]
    EmptySweep,
}
