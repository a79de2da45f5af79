//! Flat `key=value` config files, merged into the argument list ahead of the
//! command-line flags so that flags win.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// One `key=value` entry and the line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parses a config file body. Blank lines and lines starting with `#` are skipped.
pub fn parse(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value, got `{line}`",
                i + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(CliError::Usage(format!("config line {}: bad key `{key}`", i + 1)));
        }
        if key == "config" {
            return Err(CliError::Usage(format!(
                "config line {}: key `config` cannot be nested",
                i + 1
            )));
        }
        entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(entries)
}

/// Path given by `--config PATH` or `--config=PATH`, if any.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn flag_key(token: &str) -> Option<&str> {
    let body = token.strip_prefix("--")?;
    if body.is_empty() {
        return None;
    }
    Some(body.split_once('=').map_or(body, |(k, _)| k))
}

/// Keys occurring more than once among `tokens`.
fn duplicates<'a>(tokens: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        if let Some(k) = flag_key(t) {
            *counts.entry(k).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, n)| n > 1)
        .map(|(k, _)| k.to_string())
        .collect()
}

/// Argument list with config-file entries spliced in after the subcommand,
/// plus warnings for keys repeated within the file or within the flags.
pub fn expand(args: Vec<String>) -> Result<(Vec<String>, Vec<String>), CliError> {
    let mut warnings = Vec::new();
    for key in duplicates(args.iter().skip(2).map(String::as_str)) {
        warnings.push(format!("flag `--{key}` given more than once; the last value is used"));
    }
    let Some(path) = config_path(&args) else {
        return Ok((args, warnings));
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config `{path}`: {e}")))?;
    let entries = parse(&text)?;
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &entries {
        if let Some(first) = seen.insert(&e.key, e.line) {
            warnings.push(format!(
                "config key `{}` on line {} repeats line {first}; the last value is used",
                e.key, e.line
            ));
        }
    }
    let file_tokens = entries.iter().map(|e| format!("--{}={}", e.key, e.value));
    let split = args.len().min(2);
    let mut merged: Vec<String> = args[..split].to_vec();
    merged.extend(file_tokens);
    merged.extend(args[split..].iter().cloned());
    Ok((merged, warnings))
}
