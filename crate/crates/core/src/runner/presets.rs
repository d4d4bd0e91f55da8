//! Compiled-in scenarios, one per figure panel, plus group names that expand
//! to several runs.

use crate::error::{Error, Result};
use crate::model::{ALPHA_CHAOTIC, ALPHA_REGULAR};

use super::config::{ScenarioConfig, StateKind};

#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const fn info(name: &'static str, description: &'static str) -> PresetInfo {
    PresetInfo { name, description }
}

pub const PRESETS: &[PresetInfo] = &[
    info("fig2a", "diagonal Gaussian, regular (alpha 0.03), E0 = 1.5; same run as fig2d"),
    info("fig2b", "diagonal Gaussian, regular, E0 = 15; same run as fig2e"),
    info("fig2c", "diagonal Gaussian, regular, E0 = 150; same run as fig2f"),
    info("fig2d", "diagonal Gaussian, regular, E0 = 1.5"),
    info("fig2e", "diagonal Gaussian, regular, E0 = 15"),
    info("fig2f", "diagonal Gaussian, regular, E0 = 150"),
    info("fig3a", "diagonal Gaussian, chaotic (alpha 1), E0 = 1.5; same run as fig3d"),
    info("fig3b", "diagonal Gaussian, chaotic, E0 = 15; same run as fig3e"),
    info("fig3c", "diagonal Gaussian, chaotic, E0 = 150; same run as fig3f"),
    info("fig3d", "diagonal Gaussian, chaotic, E0 = 1.5"),
    info("fig3e", "diagonal Gaussian, chaotic, E0 = 15"),
    info("fig3f", "diagonal Gaussian, chaotic, E0 = 150"),
    info("fig4-regular-x", "Gaussian moving along the x channel, regular, E0 = 15"),
    info("fig4-regular-y", "Gaussian moving along the y channel, regular, E0 = 15"),
    info("fig4-chaotic-x", "Gaussian moving along the x channel, chaotic, E0 = 15"),
    info("fig4-chaotic-y", "Gaussian moving along the y channel, chaotic, E0 = 15"),
    info("fig5-regular-x", "Gaussian moving along the x channel, regular, E0 = 150"),
    info("fig5-regular-y", "Gaussian moving along the y channel, regular, E0 = 150"),
    info("fig5-chaotic-x", "Gaussian moving along the x channel, chaotic, E0 = 150"),
    info("fig5-chaotic-y", "Gaussian moving along the y channel, chaotic, E0 = 150"),
    info("fig6-regular", "cat state along the x channel, regular, E0 = 15, with its companion"),
    info("fig6-chaotic", "cat state along the x channel, chaotic, E0 = 15, with its companion"),
    info("fig6-regular-companion", "single Gaussian at the second cat packet, regular, E0 = 15"),
    info("fig6-chaotic-companion", "single Gaussian at the second cat packet, chaotic, E0 = 15"),
    info("fig7-regular-e15", "Bell-type state, regular, E0 = 15"),
    info("fig7-chaotic-e15", "Bell-type state, chaotic, E0 = 15"),
    info("fig7-regular-e150", "Bell-type state, regular, E0 = 150"),
    info("fig7-chaotic-e150", "Bell-type state, chaotic, E0 = 150"),
    info("fig2", "group: fig2a, fig2b, fig2c (panels d-f are the S_V columns of the same runs)"),
    info("fig3", "group: fig3a, fig3b, fig3c"),
    info("fig4", "group: the four fig4 channel runs"),
    info("fig5", "group: the four fig5 channel runs"),
    info("fig6", "group: both fig6 cat runs and their companions"),
    info("fig7", "group: the four fig7 Bell runs"),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

fn alpha_of(regime: &str) -> Option<f64> {
    match regime {
        "regular" => Some(ALPHA_REGULAR),
        "chaotic" => Some(ALPHA_CHAOTIC),
        _ => None,
    }
}

fn single(name: &str) -> Option<ScenarioConfig> {
    let cfg = |kind, alpha, e0| Some(ScenarioConfig::new(name, kind, alpha, e0));
    if let Some(panel) = name.strip_prefix("fig2").or_else(|| name.strip_prefix("fig3")) {
        let alpha = if name.starts_with("fig2") { ALPHA_REGULAR } else { ALPHA_CHAOTIC };
        let e0 = match panel {
            "a" | "d" => 1.5,
            "b" | "e" => 15.0,
            "c" | "f" => 150.0,
            _ => return None,
        };
        return cfg(StateKind::GaussianDiagonal, alpha, e0);
    }
    let parts: Vec<&str> = name.split('-').collect();
    match parts.as_slice() {
        [fig @ ("fig4" | "fig5"), regime, dir] => {
            let e0 = if *fig == "fig4" { 15.0 } else { 150.0 };
            let kind = match *dir {
                "x" => StateKind::GaussianChannelX,
                "y" => StateKind::GaussianChannelY,
                _ => return None,
            };
            cfg(kind, alpha_of(regime)?, e0)
        }
        ["fig6", regime] => cfg(StateKind::CatChannel, alpha_of(regime)?, 15.0),
        ["fig6", regime, "companion"] => cfg(StateKind::GaussianOffset, alpha_of(regime)?, 15.0),
        ["fig7", regime, energy] => {
            let e0 = match *energy {
                "e15" => 15.0,
                "e150" => 150.0,
                _ => return None,
            };
            cfg(StateKind::Bell, alpha_of(regime)?, e0)
        }
        _ => None,
    }
}

fn expand(name: &str) -> Option<Vec<&'static str>> {
    Some(match name {
        "fig2" => vec!["fig2a", "fig2b", "fig2c"],
        "fig3" => vec!["fig3a", "fig3b", "fig3c"],
        "fig4" => vec!["fig4-regular-x", "fig4-regular-y", "fig4-chaotic-x", "fig4-chaotic-y"],
        "fig5" => vec!["fig5-regular-x", "fig5-regular-y", "fig5-chaotic-x", "fig5-chaotic-y"],
        "fig6" => vec!["fig6-regular", "fig6-regular-companion", "fig6-chaotic", "fig6-chaotic-companion"],
        "fig6-regular" => vec!["fig6-regular", "fig6-regular-companion"],
        "fig6-chaotic" => vec!["fig6-chaotic", "fig6-chaotic-companion"],
        "fig7" => vec!["fig7-regular-e15", "fig7-chaotic-e15", "fig7-regular-e150", "fig7-chaotic-e150"],
        _ => return None,
    })
}

/// Configs for a preset name: one for a panel, several for a group.
pub fn preset(name: &str) -> Result<Vec<ScenarioConfig>> {
    let unknown = || {
        Error::validation(
            "runner.unknown_preset",
            format!("unknown preset {name:?}; known presets: {}", preset_names().join(", ")),
        )
    };
    if !PRESETS.iter().any(|p| p.name == name) {
        return Err(unknown());
    }
    match expand(name) {
        Some(names) => names.into_iter().map(|n| single(n).ok_or_else(unknown)).collect(),
        None => Ok(vec![single(name).ok_or_else(unknown)?]),
    }
}
