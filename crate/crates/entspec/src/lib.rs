//! Entanglement and negativity spectra of a free-fermion chain restricted to
//! two disjoint intervals.
//!
//! The crate computes the same spectral data along two independent routes and
//! cross-validates them:
//!
//! * an exact route that builds the restricted covariance matrix and
//!   diagonalizes it ([`gaussian_core`]), with the associated orthogonal
//!   polynomial and determinant ladders ([`orthopoly`]);
//! * an asymptotic route that evaluates the large-interval predictions for
//!   the same determinant ratios from a Riemann-Hilbert parametrix ([`rh`]),
//!   built on confluent hypergeometric kernels ([`specfun`]).
//!
//! The occupation symbol of the chain is either an ideal Fermi step or is
//! derived from a microscopic chain-reservoir model ([`model`], [`symbol`]).
//! Spectral densities, entropy differences and logarithmic negativity are
//! assembled in [`observables`], and [`cli`] exposes the whole pipeline as a
//! small set of batch commands.
//!
//! Two covariance kinds run through every API: `Plain` (the covariance
//! matrix itself, for entanglement entropy) and `Negativity` (the
//! partial-transpose variant with imaginary off-diagonal coupling, for
//! logarithmic negativity).

pub mod cli;
pub mod gaussian_core;
pub mod model;
pub mod observables;
pub mod orthopoly;
pub mod rh;
pub mod specfun;
pub mod symbol;

pub(crate) mod dense;
pub(crate) mod quad;

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A model specification failed validation.
    #[error("invalid model specification: {0}")]
    InvalidModel(String),
    /// A root or parameter search found no admissible solution.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// The Fermi level coincides with a dispersion root, so the occupation
    /// at this momentum is ill-defined.
    #[error("Fermi level degenerate with a dispersion root at p = {p}")]
    DegenerateFermiLevel { p: f64 },
    /// The sampled occupation has structure beyond a single symmetric jump
    /// pair at the Fermi points.
    #[error("occupation symbol is not a single-jump symbol: {0}")]
    MultipleJumps(String),
    /// A Fourier coefficient was requested beyond the resolved lag range.
    #[error("Fourier lag {lag} exceeds the resolved range {max} of the sampled symbol")]
    LagOutOfRange { lag: i64, max: i64 },
    /// A two-interval geometry failed the disjointness constraint.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    /// An unpivoted elimination hit a vanishing leading principal minor.
    #[error("leading principal minor {index} is numerically singular")]
    SingularMinor { index: usize },
    /// An eigenvalue left its guaranteed range by more than the clip guard.
    #[error("eigenvalue {value} outside [-1, 1] by {excess:e}, beyond the clip guard")]
    NumericalRange { value: f64, excess: f64 },
    /// An iterative eigenvalue sweep failed to deflate.
    #[error("eigenvalue iteration failed to converge at size {size}")]
    EigenDiverged { size: usize },
    /// An adaptive quadrature failed to reach its target.
    #[error("quadrature did not converge: {0}")]
    QuadratureDiverged(String),
    /// An asymptotic quantity was requested at a branch point of the
    /// Fisher-Hartwig exponents, where the jump data degenerates.
    #[error("lambda = {re}{im:+}i is a branch point of the shifted symbol")]
    BranchPoint { re: f64, im: f64 },
    /// A contour node violates the small-exponent validity condition of the
    /// asymptotic density.
    #[error(
        "contour node {re}{im:+}i has |Re beta| = {value:.3}, beyond the {limit} validity bound"
    )]
    ContourExponent { re: f64, im: f64, value: f64, limit: f64 },
    /// A special-function evaluation could not reach its accuracy target.
    #[error("special function accuracy loss: {0}")]
    SpecFun(String),
    /// Configuration or command-line input was rejected.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
