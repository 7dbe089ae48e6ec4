//! Optional TOML configuration for `describe`.
//!
//! ```toml
//! template_file = "wording.tpl"   # relative to this file
//! levels = [1, 2]
//! style = "templatized"
//!
//! [trends]
//! flat_slope = 0.05
//! ```
//!
//! Command-line flags take precedence over every key.

use std::path::{Path, PathBuf};

use chartdesc::realize::Style;
use chartdesc::trends::TrendConfig;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub template_file: Option<PathBuf>,
    pub levels: Option<Vec<u8>>,
    pub style: Option<Style>,
    #[serde(default)]
    pub trends: TrendConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(
                "config-not-found",
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        let mut config: Config = toml::from_str(&text).map_err(|e| {
            CliError::new(
                "config-invalid",
                format!("{}: {}", path.display(), e.message()),
            )
        })?;
        if let Some(file) = &config.template_file {
            if file.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new(""));
                config.template_file = Some(base.join(file));
            }
        }
        Ok(config)
    }
}
