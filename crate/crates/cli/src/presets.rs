//! Figure presets shipped inside the binary.

use serde::Deserialize;
use toml::Table;

use crate::commands::Experiment;
use crate::error::CliError;

const FIGURES: &str = include_str!("../presets/figures.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    #[serde(skip)]
    pub name: String,
    pub command: Experiment,
    pub description: String,
    pub config: Table,
}

pub fn all() -> Vec<Preset> {
    let table: toml::map::Map<String, toml::Value> = toml::from_str(FIGURES).expect("embedded presets parse");
    table
        .into_iter()
        .map(|(name, v)| {
            let mut p: Preset = v.try_into().expect("embedded preset is well formed");
            p.name = name;
            p
        })
        .collect()
}

pub fn find(name: &str) -> Result<Preset, CliError> {
    all().into_iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<String> = all().into_iter().map(|p| p.name).collect();
        CliError::Config(format!("unknown preset '{name}' (available: {})", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{merge, ExperimentConfig};

    #[test]
    fn every_preset_resolves_to_a_valid_config() {
        let presets = all();
        assert_eq!(presets.len(), 32);
        for p in presets {
            let mut t = ExperimentConfig::defaults_table();
            merge(&mut t, p.config.clone());
            let c = ExperimentConfig::from_table(t).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            c.validate().unwrap();
        }
    }

    #[test]
    fn panels_follow_the_figure_layout() {
        let get = |n: &str| find(n).unwrap();
        assert_eq!(get("fig2a").command, Experiment::ClassicalSos);
        assert_eq!(get("fig5c").command, Experiment::Otoc);
        assert_eq!(get("fig8c").command, Experiment::Spectrum);
        let xi0 = |n: &str| get(n).config["model"]["xi0"].as_float().unwrap();
        assert_eq!((xi0("fig6a"), xi0("fig6e"), xi0("fig7f")), (0.0, 0.3, 1.0));
        assert!(find("fig9a").is_err());
    }
}
