use std::path::{Path, PathBuf};

use ness_core::NessError;
use serde_json::{json, Value};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "usage".into(),
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "invalid_argument".into(),
            message: message.into(),
        }
    }

    pub fn report(&self) {
        let rec = json!({ "error": self.kind, "exitCode": self.code, "message": self.message });
        eprintln!("{rec}");
    }
}

impl From<NessError> for CliError {
    fn from(e: NessError) -> Self {
        let validation = e.is_validation() || matches!(e, NessError::Io(_));
        Self {
            code: if validation { 2 } else { 3 },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        NessError::Io(e).into()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        NessError::Json(e).into()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub struct Sink {
    pub path: Option<PathBuf>,
    pub meta: bool,
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

impl Sink {
    /// Writes `contents` and, for file output, a metadata sidecar.
    pub fn emit(&self, contents: &str, command: &str, meta: Value) -> CliResult<()> {
        match &self.path {
            Some(p) => {
                std::fs::write(p, contents)?;
                if self.meta {
                    let record = json!({
                        "command": command,
                        "version": env!("CARGO_PKG_VERSION"),
                        "metadata": meta,
                    });
                    std::fs::write(meta_path(p), serde_json::to_string_pretty(&record)? + "\n")?;
                }
            }
            None => print!("{contents}"),
        }
        Ok(())
    }
}
