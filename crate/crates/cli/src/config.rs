//! `--config FILE`: a flat JSON object whose keys are long flag names.
//!
//! The object is turned back into flags and spliced in right after the
//! subcommand, so anything given explicitly on the command line comes later
//! and wins.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};
use serde_json::Value;

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Flags equivalent to the JSON object `v`, skipping those in `explicit`.
/// Keys may use `_` or `-`.
pub fn flags_from_json(v: &Value, explicit: &[String]) -> Result<Vec<OsString>> {
    let Value::Object(map) = v else { bail!("config must be a JSON object of flag names") };
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if explicit.contains(&flag) {
            continue;
        }
        let mut push = |v: &Value| -> Result<()> {
            match v {
                Value::String(s) => out.extend([flag.clone().into(), s.into()]),
                Value::Number(n) => out.extend([flag.clone().into(), n.to_string().into()]),
                _ => bail!("config key `{key}`: unsupported value {v}"),
            }
            Ok(())
        };
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag.clone().into()),
            Value::Array(items) => {
                for item in items {
                    push(item)?;
                }
            }
            other => push(other)?,
        }
    }
    Ok(out)
}

/// `args` with the flags of the config file (if any) inserted after the
/// subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let value: Value = serde_json::from_str(&text).map_err(mrdpi::Error::from)?;
    // List flags accumulate in clap, so a flag given on the command line
    // replaces the config entry instead of being merged with it.
    let explicit: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter(|a| a.starts_with("--"))
        .map(|a| a.split('=').next().unwrap().to_string())
        .collect();
    let flags = flags_from_json(&value, &explicit)?;
    let Some(sub) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let at = sub + 2;
    let mut out = args[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
