//! Run configuration read from JSON and overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use dirac_core::eigensearch::{SearchOptions, Window};
use dirac_core::geometry::Discretization;
use dirac_core::mfs::MIN_GAP;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Discretization parameters: `N` sources, `M = M_factor·N` collocation
/// points, `L` interior points and source offset `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    #[serde(rename = "N")]
    pub sources: usize,
    #[serde(rename = "M_factor")]
    pub m_factor: usize,
    #[serde(rename = "L")]
    pub interior: usize,
    pub eta: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = Discretization::default();
        Self {
            sources: d.sources,
            m_factor: d.boundary / d.sources,
            interior: d.interior,
            eta: d.eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub window: Option<[f64; 2]>,
    pub step: f64,
    pub tol: f64,
    pub threshold: Option<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        let s = SearchOptions::default();
        Self {
            window: None,
            step: s.step,
            tol: s.tol,
            threshold: s.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub solver: SolverSection,
    pub scan: ScanSection,
    pub output: OutputSection,
    pub seed: u64,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sources: Option<usize>,
    pub m_factor: Option<usize>,
    pub interior: Option<usize>,
    pub eta: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|source| CliError::Parse {
            path: origin.to_string(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        let s = &mut self.solver;
        s.sources = o.sources.unwrap_or(s.sources);
        s.m_factor = o.m_factor.unwrap_or(s.m_factor);
        s.interior = o.interior.unwrap_or(s.interior);
        s.eta = o.eta.unwrap_or(s.eta);
        let c = &mut self.scan;
        c.window = o.window.or(c.window);
        c.step = o.step.unwrap_or(c.step);
        c.tol = o.tol.unwrap_or(c.tol);
        c.threshold = o.threshold.or(c.threshold);
        if o.out.is_some() {
            self.output.path = o.out.clone();
        }
        self.output.format = o.format.unwrap_or(self.output.format);
        self.seed = o.seed.unwrap_or(self.seed);
        self.validate()
    }

    /// Checks that do not depend on the mass.
    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        if s.sources == 0 || s.m_factor == 0 || s.interior == 0 {
            return Err(CliError::Config("N, M_factor and L must be positive".into()));
        }
        self.discretization().validate()?;
        self.search().validate()?;
        Ok(())
    }

    /// Rejects a scan window that does not start above the mass.
    pub fn validate_for_mass(&self, mass: f64) -> Result<()> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(CliError::Argument(format!("mass must be finite and non-negative, got {mass}")));
        }
        if let Some([lo, _]) = self.scan.window {
            if lo < mass + MIN_GAP {
                return Err(CliError::Config(format!(
                    "scan window starts at {lo}, which is not above the mass {mass}"
                )));
            }
        }
        Ok(())
    }

    pub fn discretization(&self) -> Discretization {
        let s = &self.solver;
        Discretization {
            sources: s.sources,
            boundary: s.sources * s.m_factor,
            interior: s.interior,
            eta: s.eta,
        }
    }

    pub fn search(&self) -> SearchOptions {
        SearchOptions {
            window: self.scan.window.map(|[lo, hi]| Window { lo, hi }),
            step: self.scan.step,
            tol: self.scan.tol,
            threshold: self.scan.threshold,
            ..SearchOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_core() {
        let c = RunConfig::default();
        assert_eq!(c.discretization(), Discretization::default());
        assert_eq!(c.search(), SearchOptions::default());
        assert_eq!(c.output.format, Format::Csv);
    }

    #[test]
    fn parses_sections() {
        let c = RunConfig::from_json(
            r#"{"solver": {"N": 100, "M_factor": 1, "L": 50, "eta": 0.1},
                "scan": {"window": [1.5, 9.0], "step": 0.02, "tol": 1e-6},
                "output": {"format": "json"}, "seed": 7}"#,
            "inline",
        )
        .unwrap();
        let d = c.discretization();
        assert_eq!((d.sources, d.boundary, d.interior), (100, 100, 50));
        assert_eq!(c.search().window, Some(Window { lo: 1.5, hi: 9.0 }));
        assert_eq!(c.output.format, Format::Json);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_json(r#"{"solvr": {}}"#, "x").is_err());
        assert!(RunConfig::from_json(r#"{"solver": {"N": 10, "extra": 1}}"#, "x").is_err());
        assert!(RunConfig::from_json(r#"{"solver": {"N": 0}}"#, "x").is_err());
        assert!(RunConfig::from_json(r#"{"scan": {"step": -1}}"#, "x").is_err());
        assert!(RunConfig::from_json(r#"{"scan": {"window": [3, 2]}}"#, "x").is_err());
    }

    #[test]
    fn window_must_start_above_the_mass() {
        let c = RunConfig::from_json(r#"{"scan": {"window": [1.0, 5.0]}}"#, "x").unwrap();
        assert!(c.validate_for_mass(1.0).is_err());
        assert!(c.validate_for_mass(2.0).is_err());
        assert!(c.validate_for_mass(0.5).is_ok());
        assert!(RunConfig::default().validate_for_mass(-1.0).is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let mut c = RunConfig::from_json(r#"{"solver": {"N": 100}, "seed": 3}"#, "x").unwrap();
        c.apply(&Overrides {
            sources: Some(50),
            seed: Some(9),
            window: Some([2.0, 4.0]),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.solver.sources, 50);
        assert_eq!(c.seed, 9);
        assert_eq!(c.scan.window, Some([2.0, 4.0]));
        assert!(c
            .apply(&Overrides {
                eta: Some(-1.0),
                ..Default::default()
            })
            .is_err());
    }
}
