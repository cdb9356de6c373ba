//! Layered configuration: defaults, then a JSON file, then flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug)]
pub enum CliError {
    /// Configuration that cannot be resolved into a complete command.
    Usage(String),
    /// Unreadable or malformed input file content.
    Input(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Domain(superres_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "invalid-input",
            CliError::Io { .. } => "io",
            CliError::Domain(e) => e.name(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) => f.write_str(m),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<superres_core::Error> for CliError {
    fn from(e: superres_core::Error) -> Self {
        CliError::Domain(e)
    }
}

/// Recursively overlays `top` onto `base`; `null` values in `top` are
/// ignored.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (_, Value::Null) => {}
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None if !v.is_null() => {
                        b.insert(k, v);
                    }
                    None => {}
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// Reads a config file; a run manifest contributes its `config` object.
fn load(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    match v {
        Value::Object(mut m) if m.contains_key("command") && m.contains_key("config") => {
            Ok(m.remove("config").unwrap_or(Value::Null))
        }
        other => Ok(other),
    }
}

/// Resolves a command configuration and returns it together with its fully
/// materialized JSON form.
pub fn resolve<T: DeserializeOwned + Serialize>(
    defaults: Value,
    file: &Option<PathBuf>,
    flags: Value,
) -> Result<(T, Value), CliError> {
    let mut v = defaults;
    if let Some(path) = file {
        merge(&mut v, load(path)?);
    }
    merge(&mut v, flags);
    let cfg: T = serde_json::from_value(v)
        .map_err(|e| CliError::Usage(format!("incomplete or invalid configuration: {e}")))?;
    let resolved = serde_json::to_value(&cfg).expect("serializable");
    Ok((cfg, resolved))
}
