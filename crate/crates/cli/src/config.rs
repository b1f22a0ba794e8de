//! Experiment configuration: TOML files layered over named presets.
//!
//! Resolution order is defaults → preset → file: the file may name a
//! preset and override any subset of keys. Unknown keys are rejected with
//! the offending key in the message.

use std::fmt;
use std::path::Path;

use bastc::engine::{ScenarioConfig, SweepConfig};
use serde::{Deserialize, Serialize};

/// Everything one experiment needs: the scenario, the sweep controls and
/// the PEP-bound grid for the `pep` subcommand.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
    pub pep: PepConfig,
}

/// Grid for the `pep` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PepConfig {
    /// Linear SNR values γ.
    pub gammas: Vec<f64>,
    /// Number of seeded random channel realizations.
    pub channels: usize,
    pub seed: u64,
}

impl Default for PepConfig {
    fn default() -> Self {
        Self {
            gammas: vec![1.0, 10.0, 100.0],
            channels: 5,
            seed: 1,
        }
    }
}

/// Configuration failures carry the exit-code split the CLI documents:
/// everything here is a config error (exit 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// On-disk shape: a preset name plus partial sections.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    preset: Option<String>,
    scenario: Option<toml::Value>,
    sweep: Option<toml::Value>,
    pep: Option<toml::Value>,
}

pub const PRESET_NAMES: &[&str] = &[
    "uncoded-rayleigh",
    "alamouti-2x1",
    "fig4",
    "fig5",
    "fig5-brs",
    "fig5-mmrs",
    "fig6",
    "fig6-abaro",
    "fig6-ralamouti",
    "fig6-alamouti",
    "fig7",
    "fig7-csi",
    "pep-bounds",
];

/// Expands a named preset into a full experiment configuration.
pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    use bastc::channel::CoherencePreset;
    use bastc::engine::{CodingScheme, SelectionPolicy, Topology};

    let mut cfg = ExperimentConfig::default();
    let s = &mut cfg.scenario;
    let w = &mut cfg.sweep;
    match name {
        // Direct-link calibration baselines.
        "uncoded-rayleigh" => {
            s.topology = Topology::P2p;
            s.relays = 0;
            s.antennas = 1;
            s.coding = CodingScheme::None;
            w.snr_db = vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0];
        }
        "alamouti-2x1" => {
            s.topology = Topology::P2p;
            s.relays = 0;
            s.antennas = 2;
            s.coding = CodingScheme::Alamouti;
            w.snr_db = vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0];
            w.max_bits = 20_000_000;
        }
        // Single-relay adjustable coding with buffers.
        "fig4" => {
            s.topology = Topology::Sas;
            s.relays = 1;
            s.selection = SelectionPolicy::Abaro;
            s.coding = CodingScheme::RAlamouti;
            s.buffer_capacity = 4;
            w.snr_db = (0..=8).map(|i| 2.0 * i as f64).collect();
        }
        // Uncoded selection-policy comparison. Buffers hold 4 packets
        // (counted here in symbol units): the max-max protocol needs that
        // depth to keep both relays schedulable.
        "fig5" | "fig5-mmrs" => {
            s.topology = Topology::Sas;
            s.relays = 2;
            s.selection = SelectionPolicy::Mmrs;
            s.coding = CodingScheme::None;
            s.buffer_capacity = 4 * s.block_len;
            w.snr_db = (0..=9).map(|i| 2.0 * i as f64).collect();
        }
        "fig5-brs" => {
            s.topology = Topology::Sas;
            s.relays = 2;
            s.selection = SelectionPolicy::Brs;
            s.coding = CodingScheme::None;
            s.buffer_capacity = 4 * s.block_len;
            w.snr_db = (0..=9).map(|i| 2.0 * i as f64).collect();
        }
        // Two-relay adjustable coding: adaptation on/off/fixed.
        "fig6" | "fig6-abaro" => {
            s.topology = Topology::Sas;
            s.relays = 2;
            s.selection = SelectionPolicy::Abaro;
            s.coding = CodingScheme::RAlamouti;
            s.buffer_capacity = 4;
            w.snr_db = (0..=8).map(|i| 2.0 * i as f64).collect();
        }
        "fig6-ralamouti" => {
            preset_base_fig6(s, w);
            s.selection = SelectionPolicy::MaxlinkNoopt;
            s.coding = CodingScheme::RAlamouti;
        }
        "fig6-alamouti" => {
            preset_base_fig6(s, w);
            s.selection = SelectionPolicy::MaxlinkNoopt;
            s.coding = CodingScheme::Alamouti;
        }
        // Multi-antenna adaptation, packet-length coherence.
        "fig7" => {
            s.topology = Topology::Mas;
            s.relays = 2;
            s.antennas = 2;
            s.selection = SelectionPolicy::Abaro;
            s.coding = CodingScheme::RAlamouti;
            s.buffer_capacity = 4;
            s.coherence = CoherencePreset::PerPacket;
            w.snr_db = (0..=8).map(|i| 2.0 * i as f64).collect();
        }
        "fig7-csi" => {
            cfg = preset("fig7")?;
            cfg.scenario.csi_error_var = 0.1;
        }
        "pep-bounds" => {
            cfg.pep = PepConfig::default();
        }
        other => {
            return Err(ConfigError(format!(
                "unknown preset \"{other}\"; available: {}",
                PRESET_NAMES.join(", ")
            )));
        }
    }
    Ok(cfg)
}

fn preset_base_fig6(s: &mut ScenarioConfig, w: &mut SweepConfig) {
    use bastc::engine::Topology;
    s.topology = Topology::Sas;
    s.relays = 2;
    s.buffer_capacity = 4;
    w.snr_db = (0..=8).map(|i| 2.0 * i as f64).collect();
}

/// Parses a config file: optional preset, then explicit keys override it.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_str_with_base(text, None)
}

/// Like [`parse_config_str`] with a fallback preset used when the file
/// does not name one (the CLI's `--preset` beneath `--config`).
pub fn parse_config_str_with_base(
    text: &str,
    default_preset: Option<&str>,
) -> Result<ExperimentConfig, ConfigError> {
    let file: ExperimentFile =
        toml::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))?;
    let base = match file.preset.as_deref().or(default_preset) {
        Some(name) => preset(name)?,
        None => ExperimentConfig::default(),
    };

    let mut merged =
        toml::Value::try_from(&base).map_err(|e| ConfigError(format!("internal: {e}")))?;
    for (section, value) in [
        ("scenario", file.scenario),
        ("sweep", file.sweep),
        ("pep", file.pep),
    ] {
        if let Some(v) = value {
            merge_value(
                merged
                    .get_mut(section)
                    .expect("default config has all sections"),
                v,
            );
        }
    }
    let cfg: ExperimentConfig = merged
        .try_into()
        .map_err(|e| ConfigError(format!("config error: {e}")))?;
    cfg.scenario
        .validate()
        .map_err(|e| ConfigError(e.to_string()))?;
    if cfg.sweep.snr_db.is_empty() {
        return Err(ConfigError("sweep.snr_db must not be empty".into()));
    }
    Ok(cfg)
}

/// Emits the resolved configuration as TOML; `parse_config_str` of the
/// output reproduces the input exactly.
pub fn emit_config(cfg: &ExperimentConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serializes")
}

/// Recursive table merge: `over` wins, tables merge key-wise.
fn merge_value(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_value(slot, v),
                    None => {
                        // Unknown key: keep it so the typed deserialize
                        // rejects it with a message naming the key.
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bastc::engine::{SelectionPolicy, Topology};

    #[test]
    fn minimal_preset_file_expands_fully() {
        let cfg = parse_config_str("preset = \"fig6\"\n").unwrap();
        assert_eq!(cfg.scenario.topology, Topology::Sas);
        assert_eq!(cfg.scenario.selection, SelectionPolicy::Abaro);
        assert_eq!(cfg.scenario.relays, 2);
        cfg.scenario.validate().unwrap();
    }

    #[test]
    fn file_overrides_preset() {
        let cfg =
            parse_config_str("preset = \"fig6\"\n[scenario]\nrelays = 1\n[sweep]\nseed = 99\n")
                .unwrap();
        assert_eq!(cfg.scenario.relays, 1);
        assert_eq!(cfg.sweep.seed, 99);
        assert_eq!(cfg.scenario.selection, SelectionPolicy::Abaro);
    }

    #[test]
    fn divisibility_violation_names_both_keys() {
        let err = parse_config_str(
            "[scenario]\ntopology = \"mas\"\nantennas = 3\nblock_len = 100\ncoding = \"alamouti\"\n",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("M = 100"), "{err}");
        assert!(err.contains("N = 3"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = parse_config_str("[scenario]\nblok_len = 10\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("blok_len"), "{err}");
        let err = parse_config_str("mystery = 3\n").unwrap_err().to_string();
        assert!(err.contains("mystery"), "{err}");
    }

    #[test]
    fn emitted_config_round_trips() {
        let cfg = preset("fig5-brs").unwrap();
        let text = emit_config(&cfg);
        let back = parse_config_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn every_preset_is_valid() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.scenario
                .validate()
                .unwrap_or_else(|e| panic!("preset {name}: {e}"));
        }
    }
}
