use thiserror::Error;

/// Errors raised by the library. Messages carry the module that produced them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{module}: parameter out of domain: {detail}")]
    ParameterDomain { module: &'static str, detail: String },

    #[error("{module}: out of range: {detail}")]
    Range { module: &'static str, detail: String },

    #[error("{module}: numeric failure: {detail}")]
    Numeric { module: &'static str, detail: String },

    #[error("perturb: loss of orthogonality at degree {degree} (overlap {overlap:.3e}); reduce n_max")]
    Conditioning { degree: usize, overlap: f64 },

    #[error("{module}: unsupported: {detail}")]
    Capability { module: &'static str, detail: String },

    #[error("{module}: usage: {detail}")]
    Usage { module: &'static str, detail: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(module: &'static str, detail: impl Into<String>) -> Self {
        Error::ParameterDomain { module, detail: detail.into() }
    }

    pub(crate) fn range(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Range { module, detail: detail.into() }
    }

    pub(crate) fn numeric(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric { module, detail: detail.into() }
    }

    pub(crate) fn capability(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Capability { module, detail: detail.into() }
    }

    pub(crate) fn usage(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Usage { module, detail: detail.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ParameterDomain { .. }
            | Error::Range { .. }
            | Error::Capability { .. }
            | Error::Usage { .. } => 2,
            Error::Numeric { .. } | Error::Conditioning { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
