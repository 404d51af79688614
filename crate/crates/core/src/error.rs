use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    MissingEquals { line: usize },
    #[error("line {line}: invalid value {value:?} for `{key}`")]
    InvalidValue { line: usize, key: String, value: String },
    #[error("invalid configuration ({keys}): {reason}")]
    Validation { keys: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoordinateError {
    #[error("coordinate {0:?} is not ddmm.mmmm")]
    Malformed(String),
    #[error("minutes out of range in {0:?}")]
    MinutesOutOfRange(String),
    #[error("unknown hemisphere {0:?}")]
    Hemisphere(String),
    #[error("coordinate {0} out of range")]
    OutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("transport closed")]
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModemError {
    #[error("SMS body is {0} characters, limit is 160")]
    BodyTooLong(usize),
    #[error("SMS body contains unsupported character {0:?}")]
    UnsupportedChar(char),
    #[error("invalid destination number {0:?}")]
    InvalidNumber(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("modem answered ERROR")]
    ModemRejected,
    #[error("timed out waiting for modem response")]
    Timeout,
    #[error("unexpected modem response")]
    Unexpected,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
