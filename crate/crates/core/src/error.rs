//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building channel models or running
/// the prior optimization.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("attenuation must lie in (0, 1], got {0}")]
    InvalidEta(f64),

    #[error("mean photon number must be finite and nonnegative, got {0}")]
    InvalidMeanPhotons(f64),

    #[error("truncation dimension must be at least {min}, got {got}")]
    DimTooSmall { min: usize, got: usize },

    #[error("truncation dimension {got} exceeds the hard cap {cap}")]
    DimTooLarge { got: usize, cap: usize },

    #[error("probability p[{index}] = {value} is negative or not finite")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum:.17e}, expected 1 within {tol:.1e}")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("dimension mismatch: prior has {prior}, kernel has {kernel}")]
    DimMismatch { prior: usize, kernel: usize },

    #[error("squeezing parameter xi must lie in (0, 1], got {0}")]
    InvalidXi(f64),

    #[error("squeezing photon count {squeeze} exceeds the power budget {budget}")]
    PowerConstraintViolated { squeeze: f64, budget: f64 },

    #[error("objective decreased by {delta:.3e} at iteration {iter}; the recursion is numerically corrupted")]
    ObjectiveDecreased { iter: usize, delta: f64 },

    #[error("multiplicative update produced an all-zero prior; the input prior is corrupted")]
    DegeneratePrior,

    #[error("no multiplier bracket for target power {target} after {expansions} expansions (power saturates at {reachable})")]
    BracketNotFound {
        target: f64,
        reachable: f64,
        expansions: usize,
    },

    #[error(
        "power bisection stalled: achieved {achieved} for target {target} after {steps} steps"
    )]
    BisectionStalled {
        target: f64,
        achieved: f64,
        steps: usize,
    },

    #[error("achieved power is not decreasing in mu: N({mu_lo}) = {n_lo} but N({mu_hi}) = {n_hi}")]
    NonMonotonePower {
        mu_lo: f64,
        mu_hi: f64,
        n_lo: f64,
        n_hi: f64,
    },

    #[error("thermal-prior mutual information is zero; percent improvement is undefined")]
    ZeroBaseline,

    #[error("the optimized number channel requires a Blahut configuration")]
    MissingBlahutConfig,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
