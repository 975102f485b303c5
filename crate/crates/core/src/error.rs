use thiserror::Error;

use crate::{geometry::GeometryError, heat::HeatError, polyroot::RootError, radial::RadialError};
use crate::{rigidity::RigidityError, scattering::ScatteringError, wave::WaveError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error; each module has its own error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Heat(#[from] HeatError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {what}: {message}")]
    Parse { what: String, message: String },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn parse(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.into(),
        }
    }
}
