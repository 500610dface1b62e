//! `key=value` configuration files: one pair per line, `#` starts a comment line.

use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_pair(text: &str) -> Result<(String, String)> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got {text:?}")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("empty key in {text:?}")));
    }
    Ok((key.to_owned(), value.trim().to_owned()))
}

pub fn parse_lines(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_pair)
        .collect()
}

pub fn read_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lines(&text)
}
