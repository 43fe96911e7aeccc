use blockade::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] blockade::Error),
    /// Input understood but refused, e.g. a pattern that fails the median test.
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("{0}")]
    Usage(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// 0 is success; 1 I/O, 2 validation or rejection, 3 capacity, 4 numerical.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Capacity => 3,
                ErrorKind::Numerical => 4,
                ErrorKind::Io => 1,
            },
            CliError::Rejected(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let cap = CliError::from(blockade::Error::Capacity {
            what: "x",
            got: 2,
            limit: 1,
        });
        assert_eq!(cap.exit_code(), 3);
        let num = CliError::from(blockade::Error::Numerical {
            what: "x",
            residual: 1.0,
            tolerance: 0.1,
        });
        assert_eq!(num.exit_code(), 4);
        assert_eq!(CliError::from(blockade::Error::invalid("x")).exit_code(), 2);
        assert_eq!(CliError::Rejected("x".into()).exit_code(), 2);
        assert_eq!(CliError::io("f", std::io::Error::other("x")).exit_code(), 1);
    }
}
