//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Two scene points coincide (or nearly so), so path geometry is undefined.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The BS-departure and target-arrival rays are (near-)parallel; the
    /// scatterer intersection of the initializer is undefined.
    #[error("near-parallel rays: intersection denominator {denominator:.3e} below tolerance")]
    NearParallelRays { denominator: f64 },

    /// A delay maps outside the unambiguous frequency range (0, 1].
    #[error("delay {tau_s:.6e} s outside the unambiguous range (0, {max_s:.6e}] s")]
    DelayOutOfRange { tau_s: f64, max_s: f64 },

    /// An angle frequency maps outside the invertible range of arcsin.
    #[error("angle frequency ratio {ratio:.6} exceeds 1 in magnitude; not a physical angle")]
    AngleOutOfRange { ratio: f64 },

    /// A decomposition was asked for more components than the matrix supports.
    #[error("rank deficient: requested {requested} components, achievable rank {achievable}")]
    RankDeficient { requested: usize, achievable: usize },

    /// Two delay-level frequencies coincide; the single-shift pencil cannot
    /// separate them.
    #[error("delay-frequency collision: components {i} and {j} within {separation:.3e} cycles")]
    FrequencyCollision { i: usize, j: usize, separation: f64 },

    /// A linear system is too ill-conditioned to solve reliably.
    #[error("ill-conditioned system: condition number {cond:.3e}")]
    IllConditioned { cond: f64 },

    /// A Fisher information matrix is singular on the transformed space.
    #[error("singular Fisher information: null direction dominated by `{direction}`")]
    SingularFim { direction: String },

    /// A numerical evaluation produced a non-finite value.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// Inconsistent dimensions between inputs.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Invalid configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
