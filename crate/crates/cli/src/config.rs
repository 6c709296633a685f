//! Config loading and `--set key=value` overrides.

use std::fs;
use std::path::Path;

use lambshift_core::experiments::ExperimentConfig;
use serde::Deserialize;
use toml::{Table, Value};

use crate::CliError;

/// Parse `key.path=value`. The value is read as a TOML literal and falls back
/// to a bare string, so `trap.model=none` and `trap.model="none"` agree.
pub fn parse_override(raw: &str) -> Result<(Vec<String>, Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::config(raw, "override must look like key=value"))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(CliError::config(key, "empty path segment in override key"));
    }
    let value = value.trim();
    let parsed = toml::from_str::<Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));
    Ok((path, parsed))
}

/// Set `path` in `table`, creating intermediate tables.
pub fn set_path(table: &mut Table, path: &[String], value: Value) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("override path is never empty");
    let mut cur = table;
    for (i, seg) in parents.iter().enumerate() {
        let entry = cur.entry(seg.clone()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::config(&path[..=i].join("."), "is not a section")),
        };
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// Sources of configuration, lowest precedence first: built-in defaults, the
/// config file, `--set` overrides, then dedicated flags.
#[derive(Debug, Default, Clone)]
pub struct ConfigSources<'a> {
    pub path: Option<&'a Path>,
    pub overrides: &'a [String],
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
}

pub fn resolve(src: &ConfigSources) -> Result<ExperimentConfig, CliError> {
    let mut table = match src.path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::config(&p.display().to_string(), &format!("cannot read: {e}")))?;
            toml::from_str::<Table>(&text).map_err(|e| CliError::config(&p.display().to_string(), &e.to_string()))?
        }
        None => Table::new(),
    };
    for raw in src.overrides {
        let (path, value) = parse_override(raw)?;
        set_path(&mut table, &path, value)?;
    }
    if let Some(seed) = src.seed {
        let seed = i64::try_from(seed).map_err(|_| CliError::config("seed", "must fit in a signed 64-bit integer"))?;
        table.insert("seed".into(), Value::Integer(seed));
    }
    if let Some(n) = src.realizations {
        table.insert("n_realizations".into(), Value::Integer(n as i64));
    }
    let cfg =
        ExperimentConfig::deserialize(Value::Table(table)).map_err(|e| CliError::config("config", &e.to_string()))?;
    cfg.validate().map_err(CliError::from)?;
    Ok(cfg)
}
