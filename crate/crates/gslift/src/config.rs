//! Optional `--config file.toml`: flat `key = value` pairs mirroring long flags.
//!
//! Pairs are spliced in right after the subcommand name, so a flag given on the
//! command line comes later and wins.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{self, Error, Result};

fn flag_values(path: &Path, key: &str, value: &toml::Value) -> Result<Vec<OsString>> {
    let flag = OsString::from(format!("--{key}"));
    let scalar = |v: &toml::Value| -> Result<String> {
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            _ => return Err(Error::format(path, format!("config key '{key}' must be a string, number, bool or list"))),
        })
    };
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag],
        toml::Value::Boolean(false) => vec![],
        toml::Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            vec![flag, parts.join(",").into()]
        }
        other => vec![flag, scalar(other)?.into()],
    })
}

/// Removes `--config <path>` / `--config=<path>` and splices the file's flags
/// after the subcommand (the first argument not starting with '-').
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            config = it.next();
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(p.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let path = Path::new(&path);
    let text = String::from_utf8(error::read(path)?).map_err(|_| Error::format(path, "config is not UTF-8"))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    let mut injected = Vec::new();
    for (key, value) in &table {
        injected.extend(flag_values(path, key, value)?);
    }
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(rest.len());
    rest.splice(at..at, injected);
    Ok(rest)
}
