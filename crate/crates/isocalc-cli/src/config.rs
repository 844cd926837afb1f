//! `key = value` configuration file and the merged per-run settings.
//! Flags override config values; unset values fall back to per-command
//! defaults.

use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::output::Format;

/// Residual-table row cap when the config does not set `max_terms`.
pub const DEFAULT_RESIDUAL_CAP: u64 = 10_000_000;

/// Values read from a config file.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub digits: Option<u32>,
    pub max_terms: Option<u64>,
    pub cache: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text, path)
}

fn parse(text: &str, path: &Path) -> Result<FileConfig, CliError> {
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: String| {
            CliError::Usage(format!(
                "config {} line {}: {what}",
                path.display(),
                idx + 1
            ))
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad("expected `key = value`".into()));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "digits" => {
                let n: u32 = value.parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
                    bad(format!("digits must be a positive integer, got `{value}`"))
                })?;
                cfg.digits = Some(n);
            }
            "max_terms" => {
                let n: u64 = value.parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
                    bad(format!(
                        "max_terms must be a positive integer, got `{value}`"
                    ))
                })?;
                cfg.max_terms = Some(n);
            }
            "cache" => cfg.cache = Some(PathBuf::from(value)),
            "threads" => {
                let n: usize = value.parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
                    bad(format!("threads must be a positive integer, got `{value}`"))
                })?;
                cfg.threads = Some(n);
            }
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
    }
    Ok(cfg)
}

/// Fully resolved run settings: flag over config over default.
#[derive(Debug, Clone)]
pub struct Settings {
    /// Explicitly requested digits, if any; commands fall back to their
    /// own default otherwise.
    pub digits: Option<u32>,
    pub max_terms: Option<u64>,
    pub cache: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Format,
    pub no_timestamp: bool,
}

impl Settings {
    pub fn resolve(
        file: FileConfig,
        digits_flag: Option<u32>,
        threads_flag: Option<usize>,
        format_flag: Option<Format>,
        no_timestamp: bool,
    ) -> Self {
        Settings {
            digits: digits_flag.or(file.digits),
            max_terms: file.max_terms,
            cache: file.cache,
            threads: threads_flag.or(file.threads),
            format: format_flag.unwrap_or(Format::Text),
            no_timestamp,
        }
    }

    pub fn digits_or(&self, default: u32) -> u32 {
        self.digits.unwrap_or(default)
    }

    /// Step budget for the e-threshold search.
    pub fn threshold_cap(&self) -> u64 {
        self.max_terms
            .unwrap_or(isocalc::constants::E_THRESHOLD_CAP)
    }

    /// Row budget for the residual table sweep.
    pub fn residual_cap(&self) -> u64 {
        self.max_terms.unwrap_or(DEFAULT_RESIDUAL_CAP)
    }
}
