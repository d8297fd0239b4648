use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The polynomial is identically zero.
    #[error("degenerate: polynomial is identically zero")]
    Degenerate,

    #[error("root iteration did not converge (max residual {residual:.3e}, {converged} of {total} roots settled)")]
    NoConvergence {
        residual: f64,
        converged: usize,
        total: usize,
        partial: Vec<num_complex::Complex64>,
    },

    #[error("ill-posed elimination: both leading coefficients in the eliminated variable vanish identically")]
    IllPosedElimination,

    #[error("degree cap exceeded: {what} = {value} > {cap}; use orbit-tree sampling (strategy tree/sampled) instead")]
    DegreeCap {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("diagonal component: the graph contains the diagonal, periodic points are not isolated")]
    DiagonalComponent,

    #[error("branch derivative undefined: point is a ramification point")]
    Ramification,

    #[error("test function support violation: {0}")]
    SupportViolation(String),

    #[error("grid refinement required: {flagged} of {total} samples hit ramification values")]
    GridRefinement { flagged: usize, total: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
