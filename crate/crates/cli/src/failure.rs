use std::fmt;
use std::path::Path;

use hawkes_branch::simulate::SimError;
use hawkes_branch::{Error, Scalar};

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Well-formed input the model refuses (unstable parameters, size guard, zero intensity).
    Domain,
    Io,
    /// Malformed or inconsistent input.
    Validation,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn domain(message: impl Into<String>) -> Self {
        Self { kind: Kind::Domain, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self { kind: Kind::Validation, message: message.into() }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self { kind: Kind::Io, message: format!("{}: {err}", path.display()) }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Domain => 2,
            Kind::Io => 3,
            Kind::Validation => 4,
        }
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let kind = match &err {
            Error::Io(_) | Error::Json(_) => Kind::Io,
            Error::Unstable { .. }
            | Error::ZeroIntensity { .. }
            | Error::SvdNoConvergence { .. }
            | Error::EmptyDataset
            | Error::NoEvents => Kind::Domain,
            _ => Kind::Validation,
        };
        Self { kind, message: err.to_string() }
    }
}

impl<T: Scalar> From<SimError<T>> for Failure {
    fn from(err: SimError<T>) -> Self {
        match err {
            SimError::Invalid(e) => e.into(),
            other => Failure::domain(other.to_string()),
        }
    }
}
