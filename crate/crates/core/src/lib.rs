//! Numerical laboratory for lattice points in thin annuli on the square torus.
//!
//! The crate materializes the objects behind narrow spectral projectors in two
//! dimensions: exact lattice sets in annuli and in neighborhoods of dilated
//! curves ([`lattice`]), angular cap decompositions with their dyadic census
//! ([`caps`]), exact synthesis and `L^p` norms of trigonometric polynomials
//! with lattice frequency support ([`kernel`]), exact additive energies
//! ([`energy`]), the mollified kernel with its Poisson-summation split and
//! exponential sums ([`dyadic`]), and conjectured exponent envelopes with
//! parameter sweeps and slope fits ([`analysis`]).
//!
//! Everything is deterministic: integer arithmetic is exact, floating-point
//! pipelines use fixed evaluation orders, and all randomness comes from
//! caller-provided seeds.

pub mod analysis;
pub mod bessel;
pub mod caps;
pub mod dyadic;
pub mod energy;
pub mod kernel;
pub mod lattice;
pub mod serial;

mod fit;

pub use fit::{fit_loglog, FitResult};

/// Errors shared by all modules.
///
/// The CLI maps these onto process exit codes: argument errors exit 2,
/// capacity errors exit 3, numerical/integrity failures exit 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("integrity error: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }
}
