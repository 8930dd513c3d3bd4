//! TOML run configuration. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub problem: ProblemSpec,
    /// Defaults to `exp_eps_u` with `ε_i = 1 − a/2` for power problems and
    /// to the identity otherwise.
    #[serde(default)]
    pub weight: Option<WeightSpec>,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_commands")]
    pub commands: Vec<Command>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_commands() -> Vec<Command> {
    vec![Command::Bound, Command::Eigs, Command::Report]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `|x|²/2`.
    Gaussian { d: usize },
    /// `Σ |x_i|^a/a + c Σ_{i<j} √(τ² + (x_i − x_j)²)`.
    Power { d: usize, a: f64, c: f64, tau: f64 },
    /// Expression in `x1..xd` with `+ − * / ^`, `abs`, `sqrt`, `exp`, `log`.
    Custom { d: usize, expression: String },
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProblemSpec::Gaussian { d }
            | ProblemSpec::Power { d, .. }
            | ProblemSpec::Custom { d, .. } => *d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Identity,
    /// `g_i = exp(ε_i U_i)`; needs a product-structured problem.
    ExpEpsU {
        eps: Vec<f64>,
    },
    /// `exp_eps_u` with ε chosen to maximise γ.
    Optimize,
}

/// Box `[−radius, radius]^d` for infimum searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    #[serde(default = "default_search_radius")]
    pub radius: f64,
    /// Lattice points per axis; dimension-dependent default when absent.
    #[serde(default)]
    pub grid_n: Option<usize>,
}

fn default_search_radius() -> f64 {
    8.0
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            radius: default_search_radius(),
            grid_n: None,
        }
    }
}

/// Oracle grid; dimension-dependent defaults for absent fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Number of eigenvalues (including 0); defaults to `d + 2`.
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for `report.json` and CSV tables; stdout when absent.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub csv: bool,
    /// Also write stiffness, masses and eigenvectors as CSV.
    #[serde(default)]
    pub dump_matrices: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            csv: true,
            dump_matrices: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Bound,
    Eigs,
    Verify,
    Report,
}

impl RunConfig {
    pub fn from_toml_str(src: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&src).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        let d = self.problem.dim();
        if d == 0 {
            return bad("problem.d: must be at least 1".into());
        }
        if let Some(WeightSpec::ExpEpsU { eps }) = &self.weight {
            if eps.len() != d {
                return bad(format!(
                    "weight.eps: expected {d} values, got {}",
                    eps.len()
                ));
            }
        }
        if self.commands.is_empty() {
            return bad("commands: at least one command is required".into());
        }
        if self.search.radius.is_nan() || self.search.radius <= 0.0 {
            return bad("search.radius: must be positive".into());
        }
        if let Some(k) = self.grid.k {
            if k == 0 || k > specgap::oracle::eigen::MAX_EIGS {
                return bad(format!(
                    "grid.k: must lie in 1..={}, got {k}",
                    specgap::oracle::eigen::MAX_EIGS
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bundled_configs() {
        for src in [
            include_str!("../../../configs/gaussian_d2.toml"),
            include_str!("../../../configs/power_d2.toml"),
            include_str!("../../../configs/custom_1d.toml"),
        ] {
            RunConfig::from_toml_str(src).unwrap();
        }
        let cfg = RunConfig::from_toml_str(include_str!("../../../configs/power_d2.toml")).unwrap();
        assert_eq!(
            cfg.weight,
            Some(WeightSpec::ExpEpsU {
                eps: vec![0.25, 0.25]
            })
        );
        assert_eq!(cfg.seed, Some(7));
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let cfg = RunConfig::from_toml_str(
            "schema_version = 1\n[problem]\nfamily = \"gaussian\"\nd = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.commands, default_commands());
        assert_eq!(cfg.search.radius, 8.0);
        assert!(cfg.output.csv && !cfg.output.dump_matrices);
        assert_eq!(cfg.weight, None);
    }

    #[test]
    fn rejects_unknown_keys_with_location() {
        let src = "schema_version = 1\n[problem]\nfamily = \"gaussian\"\nd = 2\nradius = 3\n";
        let msg = RunConfig::from_toml_str(src).unwrap_err().to_string();
        // tagged sections are reported at their header line
        assert!(msg.contains("radius") && msg.contains("line 2"), "{msg}");
        let src = "schema_version = 1\nbogus = 1\n[problem]\nfamily = \"gaussian\"\nd = 2\n";
        assert!(RunConfig::from_toml_str(src)
            .unwrap_err()
            .to_string()
            .contains("bogus"));
    }

    #[test]
    fn rejects_invalid_values() {
        let base = "[problem]\nfamily = \"gaussian\"\nd = 2\n";
        let err = |s: &str| RunConfig::from_toml_str(s).unwrap_err().to_string();
        assert!(err(&format!("schema_version = 2\n{base}")).contains("schema_version"));
        assert!(err(&format!("schema_version = 1\ncommands = []\n{base}")).contains("commands"));
        assert!(err(&format!(
            "schema_version = 1\n{base}[weight]\nkind = \"exp_eps_u\"\neps = [0.1]\n"
        ))
        .contains("weight.eps"));
        assert!(err(&format!("schema_version = 1\n{base}[grid]\nk = 0\n")).contains("grid.k"));
        assert!(
            err("schema_version = 1\n[problem]\nfamily = \"cubic\"\nd = 2\n").contains("cubic")
        );
    }
}
