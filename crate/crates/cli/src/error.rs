use std::path::Path;

use repcnot_core::Error as CoreError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Decode(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// Process exit code: 2 for invalid input, 3 for decoding failures,
    /// 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Decode(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                CoreError::Io(_) => 4,
                CoreError::Undecomposable { .. }
                | CoreError::SilentLogical { .. }
                | CoreError::DisconnectedDefect(_)
                | CoreError::TooManyDefects(..) => 3,
                _ => 2,
            },
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            context: path.display().to_string(),
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::Core(CoreError::InvalidSpec("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::Core(CoreError::DisconnectedDefect(3)).exit_code(),
            3
        );
        assert_eq!(CliError::Decode("x".into()).exit_code(), 3);
        let io = || std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::Core(CoreError::Io(io())).exit_code(), 4);
        assert_eq!(CliError::io(Path::new("a"), io()).exit_code(), 4);
    }
}
