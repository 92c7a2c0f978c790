use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the
/// individual subsystems so callers can branch on them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("mixture must contain at least one species")]
    EmptyMixture,
    #[error("species `{0}`: density must be positive")]
    NonPositiveDensity(String),
    #[error("temperature must be positive (got {0})")]
    NonPositiveTemperature(f64),
    #[error("τ must be positive (got {0})")]
    NonPositiveTau(f64),
    #[error("species `{0}`: mass must be positive")]
    NonPositiveMass(String),
    #[error("species `{0}`: spin degeneracy must be at least 1")]
    ZeroSpinDegeneracy(String),
    #[error("species index {index} out of range for {n} kinds")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("Bose kernel requires α ≤ 0 (got {0})")]
    DomainError(f64),
    #[error("quadrature failed to reach requested tolerance: {0}")]
    QuadratureFailure(String),
    #[error("root finding failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("Bose branch saturated{}: y = {y} ≥ sup G₀ = {sup} (condensate onset)", if label.is_empty() { String::new() } else { format!(" for species `{label}`") })]
    BoseSaturation { label: String, y: f64, sup: f64 },
    #[error("permutation enumeration too large: Π s_a! = {0} exceeds 10^6")]
    TooLarge(u64),
    #[error("missing correlation model for pair ({0}, {1})")]
    MissingCorrelation(usize, usize),
    #[error("anchor row not classical: α = {alpha} for species `{label}` exceeds {limit}")]
    AnchorNotClassical {
        label: String,
        alpha: f64,
        limit: f64,
    },
    #[error("characteristic integration step control failed at θ = {0}")]
    StiffIntegration(f64),
    #[error("z = {0} coincides with the free-particle pole")]
    PoleHit(f64),
    #[error("grid linear system is singular or residual too large ({0:.3e})")]
    SingularSystem(f64),
    #[error("contour density supports order ≤ 2 (got {0})")]
    UnsupportedOrder(usize),
    #[error("configuration grids do not match: {0}")]
    GridMismatch(String),
    #[error("radius {r} outside tabulated range [{lo}, {hi}]")]
    Extrapolation { r: f64, lo: f64, hi: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
