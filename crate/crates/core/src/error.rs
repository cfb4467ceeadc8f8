use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Context values are carried as `f64` regardless of the working scalar.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("integrand not finite at x = {x}")]
    IntegrandNotFinite { x: f64 },
    #[error("empty interval [{a}, {b}]")]
    EmptyInterval { a: f64, b: f64 },
    #[error("not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("root finder exhausted {iterations} iterations")]
    RootNoConvergence { iterations: usize },
    #[error("stiff or singular RHS: step underflow at r = {r}")]
    StiffOrSingular { r: f64 },
    #[error("degenerate Gram matrix: pivot {pivot} at index {index}")]
    DegenerateGram { index: usize, pivot: f64 },
    #[error("matrix not symmetric: |A - A^T| = {asymmetry}")]
    NotSymmetric { asymmetry: f64 },
    #[error("table underresolved: requested depth {depth}, table covers {covered}")]
    TableUnderresolved { depth: f64, covered: f64 },
    #[error("unbounded support: potential depth still {depth} at r_max = {r_max}")]
    UnboundedSupport { r_max: f64, depth: f64 },
    #[error("negative radius {r}")]
    NegativeRadius { r: f64 },
    #[error("no bound circular orbit for L = {l}")]
    NoBoundCircularOrbit { l: f64 },
    #[error("no bound orbits at this energy: E = {e}")]
    NoBoundOrbits { e: f64 },
    #[error("below circular energy: E = {e} <= E_min({l}) = {e_min}")]
    BelowCircularEnergy { e: f64, l: f64, e_min: f64 },
    #[error("inside essential spectrum: lambda = {lambda} >= omega_*^2 - margin = {limit}")]
    InsideEssentialSpectrum { lambda: f64, limit: f64 },
    #[error("redundant basis: {0}")]
    RedundantBasis(Box<Error>),
    #[error("period failure at (E, L) = ({e}, {l}): {source}")]
    PeriodFailure {
        e: f64,
        l: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
