use thiserror::Error;

use crate::perm::PermError;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed user input: files, literals, prefixes, parameters.
    #[error("input error: {0}")]
    Input(String),
    /// The symmetry graph does not keep variable vertices apart from the rest.
    #[error("encoding error: {message} (vertices {vertices:?})")]
    Encoding {
        message: String,
        vertices: Vec<usize>,
    },
    /// A condition the algorithm relies on did not hold.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Error {
        Error::Input(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Error {
        Error::Invariant(msg.into())
    }

    pub(crate) fn encoding(msg: impl Into<String>, vertices: Vec<usize>) -> Error {
        Error::Encoding {
            message: msg.into(),
            vertices,
        }
    }

    /// Process exit code for the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
