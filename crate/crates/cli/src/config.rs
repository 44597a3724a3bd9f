//! Config-file merging and the provenance sidecar.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<ambisep_core::Error> for CliError {
    fn from(e: ambisep_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Unwraps a required option or reports the missing flag.
pub fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("missing --{flag} (flag or config key)")))
}

fn strip_nulls(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

/// Fills options absent from the command line with values from the TOML
/// file at `path`. Unknown keys and ill-typed values are usage errors.
pub fn merge_config<A: Serialize + DeserializeOwned>(cli: A, path: Option<&Path>) -> CliResult<A> {
    let Some(path) = path else { return Ok(cli) };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    let file = serde_json::to_value(table).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    serde_json::from_value::<A>(file.clone()).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    let mut merged = strip_nulls(file);
    let flags = serde_json::to_value(&cli).map_err(|e| usage(e.to_string()))?;
    merged.extend(strip_nulls(flags));
    serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

/// Resolved options as JSON, without unset entries.
pub fn resolved_json<A: Serialize>(args: &A) -> Value {
    Value::Object(strip_nulls(serde_json::to_value(args).expect("options serialize")))
}

#[derive(Debug, Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    pub seed: u64,
    pub config: Value,
    pub config_sha256: String,
    pub outputs: Vec<String>,
}

/// `<artifact>.provenance.json`.
pub fn provenance_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

/// Writes the sidecar of `artifact`. The hash covers the compact JSON of
/// the resolved options, whose keys serde_json keeps sorted.
pub fn write_provenance(artifact: &Path, subcommand: &str, seed: u64, config: Value, outputs: &[PathBuf]) -> CliResult<()> {
    let compact = serde_json::to_string(&config).expect("json");
    let hash = Sha256::digest(compact.as_bytes());
    let p = Provenance {
        tool: "ambisep",
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        seed,
        config,
        config_sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
        outputs: outputs.iter().map(|o| o.display().to_string()).collect(),
    };
    fs::write(provenance_path(artifact), serde_json::to_string_pretty(&p).expect("json") + "\n")?;
    Ok(())
}
