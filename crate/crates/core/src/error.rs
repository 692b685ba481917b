use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mu3 must be positive to normalise nu3 = 1 (got {0})")]
    NonPositiveMu3(f64),
    #[error("nu2 must be positive (got {0})")]
    NonPositiveNu2(f64),
    #[error("saddle-node curve requires mu2 <= 0 over the whole range (got upper end {0})")]
    PositiveMu2InRange(f64),
    #[error("range [{lo}, {hi}] leaves the validity domain mu2 < {bound}")]
    RangeOutsideValidity { lo: f64, hi: f64, bound: f64 },
    #[error("no real negative Schecter intersection for mu3 = {0}")]
    NoIntersection(f64),
    #[error("Newton refinement of an intersection did not converge")]
    IntersectionNotConverged,
    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureNotConverged { tol: f64, estimate: f64 },
    #[error("three equilibria required (discriminant {0} is not negative)")]
    NoThreeEquilibria(f64),
    #[error("the level set of the right saddle does not close into a loop")]
    NoHomoclinicLoop,
    #[error("root not bracketed on [{lo}, {hi}]")]
    BracketFailed { lo: f64, hi: f64 },
    #[error("root finder did not converge in {0} iterations")]
    RootNotConverged(usize),
    #[error("continuation root not bracketed near sample {index}")]
    RootNotBracketed { index: usize },
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("maximum integration time {0} exceeded")]
    MaxTimeExceeded(f64),
    #[error("integration produced a non-finite state at t = {0}")]
    NonFiniteState(f64),
    #[error("equilibrium is not a saddle")]
    NotASaddle,
    #[error("manifold offset {0:e} outside [1e-8, 1e-4]")]
    InvalidOffset(f64),
    #[error("section x = {section} not reached before t = {max_time}")]
    NoCrossing { section: f64, max_time: f64 },
    #[error("alpha must be positive (got {0})")]
    NonPositiveAlpha(f64),
    #[error("a12 must be non-zero for the Lienard reduction")]
    ZeroA12,
    #[error("no canonical form: a11*a22 = {0} must be negative when a22 != 0")]
    BranchUnavailable(f64),
    #[error("hypotheses violated: {}", .0.join("; "))]
    HypothesesViolated(Vec<String>),
    #[error("h = {h} outside the admissible interval ({lo}, {hi})")]
    LeafOutsideInterval { h: f64, lo: f64, hi: f64 },
    #[error("no limit cycle found on leaf h = {0}")]
    CycleNotFound(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
