//! Library side of the `spectra` command: sweeps, engine cross-validation
//! and distribution tables, each producing a CSV-ready [`table::SweepResult`].

pub mod distributions;
pub mod grid;
pub mod sweep;
pub mod table;
pub mod validate;

use std::fmt;
use std::path::Path;

use anyhow::Result;
use spectra::{ScenarioConfig, SubBandId};

/// A scenario that cannot be loaded or is invalid. The binary maps it to exit
/// status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<spectra::Error> for ConfigError {
    fn from(e: spectra::Error) -> Self {
        match e {
            spectra::Error::InvalidConfig(v) => {
                ConfigError(v.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))
            }
            other => ConfigError(other.to_string()),
        }
    }
}

/// Loads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let cfg = spectra::config::load(path).map_err(ConfigError::from)?;
    cfg.ensure_valid().map_err(ConfigError::from)?;
    Ok(cfg)
}

/// `seller:band`, e.g. `0:1`.
pub fn parse_band(text: &str) -> Result<SubBandId, String> {
    let (s, b) = text.split_once(':').ok_or_else(|| format!("band `{text}`: expected seller:band"))?;
    let s = s.trim().parse().map_err(|_| format!("band `{text}`: bad seller index"))?;
    let b = b.trim().parse().map_err(|_| format!("band `{text}`: bad band index"))?;
    Ok(SubBandId::new(s, b))
}
