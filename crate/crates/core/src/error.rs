use thiserror::Error;

use crate::capacity::CapacityError;
use crate::channel::ChannelError;
use crate::detection::DetectionError;
use crate::harness::ConfigError;
use crate::multicell::MulticellError;
use crate::numerics::NumericsError;
use crate::precoding::PrecodingError;

/// Any failure surfaced by an experiment run.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Precoding(#[from] PrecodingError),
    #[error(transparent)]
    Multicell(#[from] MulticellError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable, machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Numerics(_) => "numerics",
            Error::Channel(_) => "channel",
            Error::Capacity(_) => "capacity",
            Error::Precoding(_) => "precoding",
            Error::Multicell(_) => "multicell",
            Error::Detection(_) => "detection",
            Error::Io(_) | Error::Csv(_) => "io",
        }
    }

    /// Process exit code for the category; 0 is reserved for success.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io(_) | Error::Csv(_) => 3,
            Error::Numerics(_) => 4,
            Error::Channel(_) => 5,
            Error::Capacity(_) => 6,
            Error::Precoding(_) => 7,
            Error::Multicell(_) => 8,
            Error::Detection(_) => 9,
        }
    }
}
