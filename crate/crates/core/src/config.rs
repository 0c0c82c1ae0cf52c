//! System files.
//!
//! ```toml
//! alpha = [0.4, 0.3, 0.5]
//! matrix = [[0.0, 1.0, -1.0], [0.2, 0.0, 0.0], [0.0, 0.5, 0.0]]
//! x0 = [1.0, -2.0, 2.0]
//!
//! [forcing]
//! k1 = { kind = "piecewise_power", t_break = 1.0, before = 1.0, exponent = -2.0 }
//! k2 = { kind = "constant", value = 0.5 }
//!
//! [nonlinearity]
//! k1 = [{ coeff = 1.0, powers = [1, 1, 0] }]
//!
//! [solver]
//! step = 0.005
//! t_end = 1000.0
//!
//! [diagnostics]
//! nu = 0.3
//! window = [100.0, 1000.0]
//! ```
//!
//! Omitted forcing components are zero. The same records are accepted as JSON
//! when the file name ends in `.json`.

use crate::model::{ForcingKind, ForcingSpec, ModelError, Monomial, MultiOrderSystem, NonlinearitySpec};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("TOML parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTable {
    pub k1: Option<ForcingKind>,
    pub k2: Option<ForcingKind>,
    pub k3: Option<ForcingKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityTable {
    #[serde(default)]
    pub k1: Vec<Monomial>,
    #[serde(default)]
    pub k2: Vec<Monomial>,
    #[serde(default)]
    pub k3: Vec<Monomial>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub nu: Option<f64>,
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasinSection {
    pub radii: Vec<f64>,
}

/// The file contents as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default)]
    pub name: Option<String>,
    pub alpha: [f64; 3],
    pub matrix: [[f64; 3]; 3],
    #[serde(default)]
    pub x0: Option<[f64; 3]>,
    #[serde(default)]
    pub forcing: Option<ForcingTable>,
    #[serde(default)]
    pub nonlinearity: Option<NonlinearityTable>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub basin: Option<BasinSection>,
}

pub const DEFAULT_STEP: f64 = 0.005;
pub const DEFAULT_T_END: f64 = 100.0;

impl SystemFile {
    pub fn parse(text: &str, format: Format) -> Result<Self, ConfigError> {
        Ok(match format {
            Format::Toml => toml::from_str(text)?,
            Format::Json => serde_json::from_str(text)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, Format::from_path(path))
    }

    /// The validated system. `x0` defaults to the zero vector.
    pub fn system(&self) -> Result<MultiOrderSystem, ConfigError> {
        let mut sys = MultiOrderSystem::linear(self.alpha, self.matrix, self.x0.unwrap_or([0.0; 3]));
        if let Some(f) = &self.forcing {
            let pick = |k: &Option<ForcingKind>| k.clone().unwrap_or(ForcingKind::Zero);
            sys = sys.with_forcing(ForcingSpec::new([pick(&f.k1), pick(&f.k2), pick(&f.k3)]));
        }
        if let Some(n) = &self.nonlinearity {
            sys = sys.with_nonlinearity(NonlinearitySpec::new([
                n.k1.clone(),
                n.k2.clone(),
                n.k3.clone(),
            ]));
        }
        Ok(sys.validate()?)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(
            self.solver.step.unwrap_or(DEFAULT_STEP),
            self.solver.t_end.unwrap_or(DEFAULT_T_END),
        );
        if let Some(t) = self.solver.newton_tol {
            cfg.newton_tol = t;
        }
        if let Some(m) = self.solver.newton_max_iter {
            cfg.newton_max_iter = m;
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX13: &str = r#"
alpha = [0.4, 0.3, 0.5]
matrix = [[0.0, 1.0, -1.0], [0.2, 0.0, 0.0], [0.0, 0.5, 0.0]]
x0 = [1.0, -2.0, 2.0]

[forcing]
k1 = { kind = "piecewise_power", t_break = 1.0, before = 1.0, exponent = -2.0 }
k2 = { kind = "piecewise_power", t_break = 1.0, before = 1.0, exponent = -4.0 }
k3 = { kind = "table", samples = [[0.0, 1.0], [2.0, 0.0]] }

[solver]
step = 0.01
"#;

    #[test]
    fn toml_round_trip_through_json() {
        let f = SystemFile::parse(EX13, Format::Toml).unwrap();
        let sys = f.system().unwrap();
        assert_eq!(sys.matrix.entries[0][2], -1.0);
        assert_eq!(f.solver_config().step, 0.01);
        assert_eq!(f.solver_config().t_end, DEFAULT_T_END);
        assert!(matches!(
            sys.forcing.as_ref().unwrap().components[0],
            ForcingKind::PiecewisePower { exponent, .. } if exponent == -2.0
        ));

        let json = serde_json::to_string(&f).unwrap();
        let g = SystemFile::parse(&json, Format::Json).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn bad_order_is_a_model_error() {
        let text = "alpha = [1.2, 0.3, 0.5]\nmatrix = [[0,0,0],[0,0,0],[0,0,0]]\n";
        let f = SystemFile::parse(text, Format::Toml).unwrap();
        assert!(matches!(
            f.system(),
            Err(ConfigError::Model(ModelError::OrderOutOfRange { .. }))
        ));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "alpha = [0.5, 0.5, 0.5]\nmatrix = [[0.0,0.0,0.0],[0.0,0.0,0.0],[0.0,0.0,0.0]]\nbeta = 1\n";
        assert!(matches!(SystemFile::parse(text, Format::Toml), Err(ConfigError::Toml(_))));
    }

    #[test]
    fn nonlinearity_section() {
        let text = format!(
            "{EX13}\n[nonlinearity]\nk1 = [{{ coeff = 1.0, powers = [1, 1, 0] }}]\n"
        );
        let sys = SystemFile::parse(&text, Format::Toml).unwrap().system().unwrap();
        assert_eq!(sys.nonlinearity.unwrap().components[0][0].powers, [1, 1, 0]);
    }
}
