use thiserror::Error;

use crate::design::DesignError;
use crate::fit::FitError;
use crate::io::IoError;
use crate::model::ModelError;
use crate::synth::SynthError;

/// Crate-level error, the union of every module's failure modes.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Io(#[from] IoError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
