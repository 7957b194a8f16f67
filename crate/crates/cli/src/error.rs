use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] argdist_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("invalid input file: {0}")]
    Input(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => CliError::Io(io),
                _ => unreachable!(),
            }
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(argdist_core::Error::Domain(_)) => "domain",
            CliError::Core(argdist_core::Error::Accuracy { .. }) => "accuracy",
            CliError::Core(argdist_core::Error::Resource(_)) => "resource",
            CliError::Core(argdist_core::Error::Overflow(_)) => "overflow",
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
        }
    }

    /// 2 usage or domain, 3 accuracy, 4 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(argdist_core::Error::Domain(_))
            | CliError::Usage(_)
            | CliError::Input(_) => 2,
            CliError::Core(argdist_core::Error::Accuracy { .. })
            | CliError::Core(argdist_core::Error::Overflow(_)) => 3,
            CliError::Core(argdist_core::Error::Resource(_)) | CliError::Io(_) => 4,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Core(argdist_core::Error::Accuracy { achieved, .. }) = self {
            v["achieved"] = json!(achieved);
        }
        v
    }
}

pub type CliResult<T> = Result<T, CliError>;
