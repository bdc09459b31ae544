use thiserror::Error;

/// Errors produced by map evaluation, root finding and the series machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested derivative order exceeds the declared smoothness.
    #[error("unsupported jet order {requested} (map is C^{available} there)")]
    UnsupportedOrder { requested: usize, available: usize },

    /// Root finding or an iteration failed to converge.
    #[error("numeric error: {context} (last bracket [{lo}, {hi}])")]
    NoConvergence { context: String, lo: f64, hi: f64 },

    /// A truncated sum cannot be trusted at the requested tolerance.
    #[error("precision failure: {0}")]
    Precision(String),

    /// Evaluation requested too close to a marker / partition boundary.
    #[error("boundary error: {0}")]
    Boundary(String),

    /// Evaluation at a pole of a closed-form factor.
    #[error("pole proximity: {0}")]
    Pole(String),

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
