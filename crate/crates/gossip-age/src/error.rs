use thiserror::Error;

/// Everything that can go wrong while validating a network, solving the
/// set-age system, or running a simulation. Position indices in messages are
/// 1-based to match the labels used everywhere else in the I/O surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative or non-finite rate: {context}")]
    NegativeRate { context: String },

    #[error(
        "mobility_rates must be symmetric: entry ({i},{j}) = {forward} but ({j},{i}) = {backward}"
    )]
    AsymmetricMobility {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },

    #[error("{matrix} has a nonzero diagonal entry at position {i}")]
    NonzeroDiagonal { matrix: &'static str, i: usize },

    #[error("no position receives updates from the source; every version age diverges")]
    ZeroSourceTotal,

    #[error("malformed network or scenario shape: {0}")]
    BadShape(String),

    #[error("scenario size constraint violated: {0}")]
    BadScale(String),

    #[error(
        "the cardinality-{level} level system is singular; some set of positions is \
         cut off from every update path"
    )]
    SingularLevelSystem { level: usize },

    #[error("exact solving supports at most {cap} positions, got {n}; use the simulator instead")]
    CapExceeded { n: usize, cap: usize },

    #[error(
        "iterative level solve stalled at cardinality {level}: residual {residual:.3e} \
         after {sweeps} sweeps"
    )]
    NoConvergence {
        level: usize,
        residual: f64,
        sweeps: u64,
    },

    #[error("simulation horizon {horizon} does not exceed warmup {warmup}")]
    DegenerateHorizon { horizon: f64, warmup: f64 },

    #[error("total event rate is not finite ({0})")]
    RateOverflow(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
