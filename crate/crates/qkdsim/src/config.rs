//! TOML configuration files.
//!
//! Every field is optional and falls back to [`MissionConfig::default`].
//! Keys the schema does not know are rejected with their dotted path, and
//! invariant violations name the offending field.

use std::path::{Path, PathBuf};

use qkdsim_core::sim::MissionConfig;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Missing {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("{0}")]
    Invalid(qkdsim_core::Error),
}

impl ConfigError {
    pub fn exit_code(&self) -> u8 {
        match self {
            ConfigError::Missing { .. } => 2,
            ConfigError::Syntax(_) => 3,
            ConfigError::UnknownKey(_) => 4,
            ConfigError::Invalid(_) => 5,
        }
    }
}

/// The full key tree, including optional fields that serialize to nothing
/// when unset.
fn schema() -> Table {
    let mut c = MissionConfig::default();
    c.scan.fixed_setting = Some(0.0);
    c.scan.grid_start = Some(0.0);
    c.scan.grid_stop = Some(0.0);
    Table::try_from(&c).expect("default config serializes")
}

fn find_unknown(user: &Table, schema: &Table, prefix: &str) -> Option<String> {
    for (key, value) in user {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match (schema.get(key), value) {
            (None, _) => return Some(path),
            (Some(Value::Table(s)), Value::Table(u)) => {
                if let Some(p) = find_unknown(u, s, &path) {
                    return Some(p);
                }
            }
            _ => {}
        }
    }
    None
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses and validates configuration text.
pub fn parse_config_str(text: &str) -> Result<MissionConfig, ConfigError> {
    let table: Table = toml::from_str(text).map_err(|e| ConfigError::Syntax(one_line(e.message())))?;
    if let Some(path) = find_unknown(&table, &schema(), "") {
        return Err(ConfigError::UnknownKey(path));
    }
    let config: MissionConfig = table.try_into().map_err(|e| ConfigError::Syntax(one_line(e.message())))?;
    config.validate().map_err(ConfigError::Invalid)?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<MissionConfig, ConfigError> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Missing { path: path.to_path_buf(), source })?;
    let text = String::from_utf8(bytes).map_err(|_| ConfigError::Syntax("config is not valid UTF-8".into()))?;
    parse_config_str(&text)
}

/// Renders a configuration as TOML that [`parse_config_str`] reads back to
/// an equal value.
pub fn to_toml(config: &MissionConfig) -> String {
    toml::to_string(config).expect("config serializes")
}
