use thiserror::Error;

/// Errors produced by the numeric core.
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A layer-graph description failed validation.
    #[error("graph spec error at node `{node}`: {message}")]
    GraphSpec { node: String, message: String },

    /// An operation was called in the wrong order (e.g. backward before
    /// forward).
    #[error("state error: {0}")]
    State(&'static str),

    /// A configuration value is out of range.
    #[error("config error: {0}")]
    Config(String),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    pub fn spec(node: impl Into<String>, msg: impl Into<String>) -> Self {
        CoreError::GraphSpec {
            node: node.into(),
            message: msg.into(),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::Config(msg.into())
    }
}
