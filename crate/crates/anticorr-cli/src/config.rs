//! Optional TOML configuration file: one section per concern, every field
//! optional. Explicit command-line flags always override file values, and
//! the `ANTICORR_SEED` environment variable serves as the seed of last
//! resort before the built-in default.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub excitation: ExcitationSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub p: Option<f64>,
    pub q: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationSection {
    /// One of number | poisson | thermal | squeezed | phase.
    pub family: Option<String>,
    pub n: Option<u64>,
    pub lambda: Option<f64>,
    pub nbar: Option<f64>,
    pub a: Option<f64>,
    pub zeta: Option<f64>,
    pub max_n: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub series: Option<u64>,
    pub seed: Option<u64>,
    pub batches: Option<u32>,
    pub tail_tol: Option<f64>,
    pub workers: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed config file {}: {e}", path.display())))
}

/// Seed precedence: flag, then file, then ANTICORR_SEED, then 0.
pub fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64, CliError> {
    if let Some(seed) = flag.or(file.simulation.seed) {
        return Ok(seed);
    }
    match std::env::var("ANTICORR_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "ANTICORR_SEED must be an unsigned 64-bit integer, got {text:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}
