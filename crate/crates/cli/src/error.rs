use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use peanoseg::estimation::EstimationError;
use peanoseg::imaging::ImagingError;
use peanoseg::scan::ScanError;
use peanoseg::SegmentError;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Inference or estimation failed (exit 1).
    Model(String),
    /// Reading or writing a file failed (exit 2).
    Io(String),
    /// Arguments are inconsistent (exit 3).
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Model(_) => 1,
            CliError::Io(_) => 2,
            CliError::Config(_) => 3,
        })
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Prefixes the message with the file it concerns.
    pub fn at(self, path: &Path) -> Self {
        let p = path.display();
        match self {
            CliError::Model(m) => CliError::Model(format!("{p}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{p}: {m}")),
            CliError::Config(m) => CliError::Config(format!("{p}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Model(m) => write!(f, "model error: {m}"),
            CliError::Io(m) => f.write_str(m),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
        }
    }
}

impl From<ImagingError> for CliError {
    fn from(e: ImagingError) -> Self {
        match e {
            ImagingError::Io(_) | ImagingError::BadFormat(_) | ImagingError::BadShape { .. } => {
                CliError::Io(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        match e {
            EstimationError::InvalidConfig(_) => CliError::Config(e.to_string()),
            EstimationError::Trace(_) => CliError::Io(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<SegmentError> for CliError {
    fn from(e: SegmentError) -> Self {
        match e {
            SegmentError::Imaging(e) => e.into(),
            SegmentError::Estimation(e) => e.into(),
            SegmentError::UnknownMethod(_) | SegmentError::NoClasses => {
                CliError::Config(e.to_string())
            }
            SegmentError::Scan(_) | SegmentError::Model(_) => CliError::Model(e.to_string()),
        }
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(format!("json error: {e}"))
    }
}
