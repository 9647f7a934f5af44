//! Flat `key = value` configuration files shared by the CLI subcommands.
//!
//! Keys are the long flag names without the leading dashes
//! (`min-responses = 100`). Blank lines and lines starting with `#` are
//! ignored. Flags given on the command line override file values; keys the
//! subcommand does not understand are rejected.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct FlatConfig {
    source_name: String,
    values: BTreeMap<String, (String, u64)>,
}

impl FlatConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k as u64 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    source_name: source_name.to_owned(),
                    line: line_no,
                    column: String::new(),
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim().to_owned();
            if values.insert(key.clone(), (value.trim().to_owned(), line_no)).is_some() {
                return Err(Error::Parse {
                    source_name: source_name.to_owned(),
                    line: line_no,
                    column: key,
                    message: "key given twice".into(),
                });
            }
        }
        Ok(Self {
            source_name: source_name.to_owned(),
            values,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Removes and parses `key`.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        let Some((text, line)) = self.values.remove(key) else {
            return Ok(None);
        };
        text.parse().map(Some).map_err(|_| Error::Parse {
            source_name: self.source_name.clone(),
            line,
            column: key.to_owned(),
            message: format!("cannot parse `{text}`"),
        })
    }

    /// `flag` when given, else the file's value for `key`.
    pub fn resolve<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        let from_file = self.take(key)?;
        Ok(flag.or(from_file))
    }

    /// Fails on any key no subcommand option consumed.
    pub fn finish(self) -> Result<()> {
        match self.values.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(Error::Parse {
                source_name: self.source_name,
                line,
                column: key.clone(),
                message: format!("unknown configuration key `{key}`"),
            }),
        }
    }
}
