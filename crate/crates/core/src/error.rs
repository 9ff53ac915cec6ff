use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// The interface violates one of the mesh/interface hypotheses (one crossing per
    /// edge, two cut points on different edges, no vertex touching).
    #[error("interface hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("root finding failed on segment {a:?} -> {b:?}: no sign change bracketed")]
    RootFindFailure { a: [f64; 2], b: [f64; 2] },

    #[error("edge-average degree-of-freedom system is numerically singular")]
    SingularBasis,

    #[error("degenerate cut geometry: {0}")]
    DegenerateGeometry(String),

    /// `1 + k γᵀδ` is too close to zero for the rank-one update to be trusted.
    #[error("Sherman-Morrison denominator {denominator:e} is numerically zero")]
    NearSingular { denominator: f64 },

    #[error("region boundary is not closed: gap {gap:e} after piece {piece}")]
    OpenBoundary { piece: usize, gap: f64 },

    #[error("assembly failed on element {element}: {source}")]
    Assembly {
        element: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("conjugate gradients did not converge: {iterations} iterations, relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("study failed at level {level} (n = {n}): {source}")]
    Level {
        level: usize,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Innermost error, skipping the assembly/level wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Assembly { source, .. } | Error::Level { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self.root_cause() {
            Error::HypothesisViolation(_)
            | Error::RootFindFailure { .. }
            | Error::DegenerateGeometry(_)
            | Error::NearSingular { .. } => 2,
            Error::NoConvergence { .. } => 3,
            _ => 1,
        }
    }
}
