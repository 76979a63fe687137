use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses flat `key = value` text. Blank lines and `#` comments are ignored.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Command-line tokens equivalent to the entries of a config file. Boolean
/// switches take `true`/`false`.
pub fn config_args(path: &Path, switches: &[&str]) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path)?;
    let mut args = Vec::new();
    for (key, value) in parse_key_values(&text)? {
        if switches.contains(&key.as_str()) {
            match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => args.push(format!("--{key}").into()),
                "false" | "no" | "0" | "off" => {}
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "switch `{key}` takes true or false, got `{other}`"
                    )))
                }
            }
        } else {
            args.push(format!("--{key}").into());
            args.push(value.into());
        }
    }
    Ok(args)
}

/// Splices the entries of any `--config FILE` ahead of the explicit flags, so
/// explicit flags win. The subcommand must be the first argument after the
/// program name.
pub fn expand_config(args: Vec<OsString>, switches: &[&str]) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut iter = args.iter().enumerate();
    while let Some((_, a)) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = iter.next().map(|(_, p)| p.clone());
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else { return Ok(args) };
    if args.len() < 2 {
        return Ok(args);
    }
    let extra = config_args(Path::new(&path), switches)?;
    let mut out = Vec::with_capacity(args.len() + extra.len());
    out.extend_from_slice(&args[..2]);
    out.extend(extra);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
