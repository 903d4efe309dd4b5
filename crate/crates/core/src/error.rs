use thiserror::Error;

use crate::data::DataError;
use crate::deform::DeformError;
use crate::mirror::MirrorError;
use crate::olps::OlpsError;
use crate::search::SearchError;

/// Any failure a command can report, classified for the process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Olps(#[from] OlpsError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Runtime,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 1,
            ErrorClass::Runtime => 2,
            ErrorClass::Io => 3,
        }
    }
}

fn deform_class(e: &DeformError) -> ErrorClass {
    match e {
        DeformError::NoConvergence { .. } => ErrorClass::Runtime,
        _ => ErrorClass::Validation,
    }
}

fn mirror_class(e: &MirrorError) -> ErrorClass {
    match e {
        MirrorError::Deform(d) => deform_class(d),
        MirrorError::InvalidRate(_) => ErrorClass::Validation,
        _ => ErrorClass::Runtime,
    }
}

fn olps_class(e: &OlpsError) -> ErrorClass {
    match e {
        OlpsError::Mirror(m) => mirror_class(m),
        OlpsError::Market(_) | OlpsError::InvalidConfig(_) => ErrorClass::Validation,
        OlpsError::AtPeriod { source, .. } => match olps_class(source) {
            // a step that fails mid-run is a runtime failure whatever its cause
            ErrorClass::Validation => ErrorClass::Runtime,
            other => other,
        },
        _ => ErrorClass::Runtime,
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Data(e) if e.is_io() => ErrorClass::Io,
            Error::Data(_) | Error::Search(_) | Error::Usage(_) => ErrorClass::Validation,
            Error::Deform(e) => deform_class(e),
            Error::Olps(e) => olps_class(e),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

impl From<MirrorError> for Error {
    fn from(e: MirrorError) -> Self {
        Error::Olps(OlpsError::Mirror(e))
    }
}
