//! Experiment presets shipped with the binary.

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const NAMES: [&str; 5] = ["fig1", "fig3", "fig4", "fig5-6", "fig7-8"];

pub fn source(name: &str) -> CliResult<&'static str> {
    Ok(match name {
        "fig1" => include_str!("../presets/fig1.toml"),
        "fig3" => include_str!("../presets/fig3.toml"),
        "fig4" => include_str!("../presets/fig4.toml"),
        "fig5-6" => include_str!("../presets/fig5-6.toml"),
        "fig7-8" => include_str!("../presets/fig7-8.toml"),
        other => return Err(CliError::UnknownPreset(other.to_string())),
    })
}

pub fn preset(name: &str) -> CliResult<ExperimentConfig> {
    ExperimentConfig::from_toml(source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for name in NAMES {
            preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(matches!(preset("fig9"), Err(CliError::UnknownPreset(_))));
    }

    #[test]
    fn fig3_is_the_full_sweep() {
        assert_eq!(preset("fig3").unwrap().sweep().len(), 60);
    }
}
