use std::path::PathBuf;

use serde_json::json;

use crate::config::SweepParam;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`{}: {message}", line_suffix(*.line))]
    Config {
        field: String,
        message: String,
        /// Line of the offending key when the config came from text.
        line: Option<usize>,
    },
    #[error("simulation failed{}: {source}", at_suffix(.at))]
    Simulation {
        at: Vec<(String, f64)>,
        #[source]
        source: subtractor_core::Error,
    },
    #[error("io error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("output encoding failed: {0}")]
    Encode(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

fn at_suffix(at: &[(String, f64)]) -> String {
    if at.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = at.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(" at {}", parts.join(", "))
}

impl RunError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        RunError::Config {
            field: field.to_string(),
            message: message.into(),
            line: None,
        }
    }

    pub fn sim(source: subtractor_core::Error) -> Self {
        RunError::Simulation { at: Vec::new(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches sweep coordinates to config and simulation errors.
    pub fn at(self, coords: &[(SweepParam, f64)]) -> Self {
        let named: Vec<(String, f64)> = coords.iter().map(|(p, v)| (p.name().to_string(), *v)).collect();
        match self {
            RunError::Config { field, message, line } if !named.is_empty() => RunError::Config {
                field,
                message: format!("{message}{}", at_suffix(&named)),
                line,
            },
            RunError::Simulation { source, .. } => RunError::Simulation { at: named, source },
            other => other,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            RunError::Parse { .. } => "parse",
            RunError::Config { .. } => "config",
            RunError::Simulation { .. } => "simulation",
            RunError::Io { .. } => "io",
            RunError::Encode(_) => "encode",
        }
    }

    /// Process exit code; 2 is left to the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse { .. } => 3,
            RunError::Config { .. } => 4,
            RunError::Simulation { .. } => 5,
            RunError::Io { .. } => 6,
            RunError::Encode(_) => 7,
        }
    }

    /// Single-line JSON report for stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.class(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            RunError::Parse { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            RunError::Config { field, line, .. } => {
                v["field"] = json!(field);
                if let Some(l) = line {
                    v["line"] = json!(l);
                }
            }
            RunError::Simulation { at, .. } => {
                v["at"] = at
                    .iter()
                    .map(|(k, x)| (k.clone(), json!(x)))
                    .collect::<serde_json::Map<_, _>>()
                    .into();
            }
            RunError::Io { path, .. } => v["path"] = json!(path.display().to_string()),
            RunError::Encode(_) => {}
        }
        v
    }
}
