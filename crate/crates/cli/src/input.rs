//! JSON state specs: a single Gaussian or a convex mixture of one-mode Gaussians.

use std::path::Path;

use qdiff::grid::{GridConfig, GridState};
use qdiff::{GaussianSpec, GaussianState};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentSpec {
    weight: f64,
    state: GaussianSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureSpec {
    components: Vec<ComponentSpec>,
}

pub enum Input {
    Gaussian(GaussianState),
    Mixture(Vec<(f64, GaussianState)>),
}

impl Input {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if value.get("components").is_some() {
            let spec: MixtureSpec =
                serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
            let components = spec
                .components
                .iter()
                .map(|c| Ok((c.weight, GaussianState::from_spec(&c.state)?)))
                .collect::<Result<Vec<_>, qdiff::Error>>()?;
            Ok(Input::Mixture(components))
        } else {
            let spec: GaussianSpec =
                serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
            Ok(Input::Gaussian(GaussianState::from_spec(&spec)?))
        }
    }

    /// Grid sampling of a one-mode input.
    pub fn grid(&self, config: GridConfig) -> Result<GridState, CliError> {
        let grid = match self {
            Input::Gaussian(st) => GridState::from_gaussian(st, config)?,
            Input::Mixture(parts) => GridState::from_gaussian_mixture(parts, config)?,
        };
        Ok(grid)
    }

    pub fn gaussian(&self, what: &str) -> Result<&GaussianState, CliError> {
        match self {
            Input::Gaussian(st) => Ok(st),
            Input::Mixture(_) => Err(CliError::Validation(format!(
                "{what} needs a single Gaussian state, not a mixture"
            ))),
        }
    }
}
