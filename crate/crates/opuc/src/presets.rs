//! Named experiment configurations.

use std::path::PathBuf;

use opuc_core::verblunsky::{Envelope, Randomizer, SlowFunction};

use crate::config::{power_checkpoints, ExperimentConfig, Suite};

pub const PRESET_NAMES: [&str; 6] = [
    "zero",
    "theorem1",
    "theorem1-slow",
    "sharpness12",
    "explore-T2",
    "diagnostics",
];

/// Ratio of median certified sups, final over half-final checkpoint,
/// allowed for presets in the bounded regime.
pub const PLATEAU_THRESHOLD: f64 = 1.10;

pub const DEFAULT_SEED: u64 = 20_240_601;

fn plateau_checkpoints(max_degree: usize) -> Vec<usize> {
    power_checkpoints(max_degree)
        .into_iter()
        .filter(|d| *d >= 16)
        .collect()
}

fn bounded(name: &str, exponent: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        envelope: Envelope::power_decay(exponent, 0.5).expect("valid preset"),
        randomizer: Randomizer::uniform_phase(seed),
        trajectories: 64,
        max_degree: 8192,
        checkpoints: plateau_checkpoints(8192),
        suites: vec![Suite::Supnorm, Suite::Oracle],
        plateau_threshold: Some(PLATEAU_THRESHOLD),
        ..ExperimentConfig::default()
    }
}

/// The preset called `name`, or `None` if there is no such preset.
pub fn preset(name: &str, seed: Option<u64>, out: Option<PathBuf>) -> Option<ExperimentConfig> {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let mut c = match name {
        "zero" => ExperimentConfig {
            name: name.into(),
            randomizer: Randomizer::uniform_phase(seed),
            trajectories: 4,
            max_degree: 4096,
            checkpoints: power_checkpoints(4096),
            suites: vec![Suite::Supnorm, Suite::Oracle],
            ..ExperimentConfig::default()
        },
        "theorem1" => bounded(name, 1.0, seed),
        "theorem1-slow" => bounded(name, 0.75, seed),
        "sharpness12" => ExperimentConfig {
            name: name.into(),
            envelope: Envelope::sparse_geometric(12, 0.01, SlowFunction::One)
                .expect("valid preset"),
            randomizer: Randomizer::uniform_phase(seed),
            max_degree: 1728,
            checkpoints: vec![144, 1728],
            suites: vec![Suite::Sharpness, Suite::Oracle],
            ..ExperimentConfig::default()
        },
        "explore-T2" => {
            let mut c = ExperimentConfig {
                name: name.into(),
                envelope: Envelope::sparse_geometric(2, 0.5, SlowFunction::One)
                    .expect("valid preset"),
                randomizer: Randomizer::uniform_phase(seed),
                trajectories: 16,
                max_degree: 8192,
                checkpoints: plateau_checkpoints(8192),
                suites: vec![Suite::Supnorm, Suite::Sharpness, Suite::Oracle],
                ..ExperimentConfig::default()
            };
            c.sharpness.levels = 13;
            c.sharpness.grid = 1 << 14;
            c
        }
        "diagnostics" => ExperimentConfig {
            name: name.into(),
            envelope: Envelope::power_decay(1.0, 0.5).expect("valid preset"),
            randomizer: Randomizer::uniform_phase(seed),
            max_degree: 64,
            checkpoints: vec![64],
            suites: vec![
                Suite::Martingale,
                Suite::Moments,
                Suite::Lattice,
                Suite::Oracle,
            ],
            ..ExperimentConfig::default()
        },
        _ => return None,
    };
    c.outputs = out.unwrap_or_else(|| PathBuf::from("out").join(name));
    Some(c)
}
