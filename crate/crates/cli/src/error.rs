use std::fmt;

use qgeom::GeomError;
use serde::Serialize;

pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical { error: GeomError, theta: Option<Vec<f64>> },
    Io(std::io::Error),
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn at(error: GeomError, theta: &[f64]) -> Self {
        CliError::Numerical { error, theta: Some(theta.to_vec()) }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical { .. } | CliError::Io(_) => EXIT_NUMERICAL,
            CliError::ChecksFailed(_) => EXIT_CHECKS_FAILED,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            code: &'a str,
            message: String,
            theta: Option<&'a [f64]>,
        }
        let (code, theta) = match self {
            CliError::Config(_) => ("CONFIG", None),
            CliError::Numerical { error, theta } => (error.code(), theta.as_deref()),
            CliError::Io(_) => ("IO", None),
            CliError::ChecksFailed(_) => ("CHECKS_FAILED", None),
        };
        serde_json::to_string(&Report { code, message: self.to_string(), theta }).expect("report serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical { error, .. } => write!(f, "{error}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::ChecksFailed(names) => write!(f, "{} check(s) failed: {}", names.len(), names.join(", ")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<GeomError> for CliError {
    fn from(error: GeomError) -> Self {
        CliError::Numerical { error, theta: None }
    }
}
