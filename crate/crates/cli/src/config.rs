//! Run configuration read from a TOML file.

use acgraph::graph::GeneratorSpec;
use acgraph::pipeline::SplitSpec;
use acgraph::variational::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Invalid { path: String, line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    pub graph: GeneratorSpec,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default = "default_split")]
    pub split: SplitSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub isoperimetry: IsoperimetrySection,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_split() -> SplitSpec {
    SplitSpec::Half
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    /// Horizon radius; defaults to `R_max - ceil(δ) - 1`.
    pub horizon: Option<usize>,
    pub epsilon: Option<f64>,
    pub quadruples: usize,
    pub triangles: usize,
    pub lambda_samples: usize,
    pub shadow_samples: usize,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { horizon: None, epsilon: None, quadruples: 20_000, triangles: 200, lambda_samples: 2000, shadow_samples: 2000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialName {
    Quartic,
    Tilted,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSection {
    pub name: PotentialName,
    pub c0: f64,
    pub c1: f64,
    pub kappa: f64,
    pub resolution: Option<f64>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { name: PotentialName::Quartic, c0: -1.0, c1: 1.0, kappa: 0.0, resolution: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsoperimetrySection {
    pub extra_centers: usize,
    pub cone_centers: usize,
    pub random_sets: usize,
    pub random_sizes: Vec<usize>,
    pub exhaustive: bool,
    pub doubling_centers: usize,
    pub doubling_levels: usize,
}

impl Default for IsoperimetrySection {
    fn default() -> Self {
        Self {
            extra_centers: 20,
            cone_centers: 20,
            random_sets: 200,
            random_sizes: vec![2, 5, 10, 20, 50],
            exhaustive: false,
            doubling_centers: 8,
            doubling_levels: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    /// Radius of the visual ball inside `D1`; defaults to the side-1 probe.
    pub r: Option<f64>,
    /// Defaults to `min(ρ0, tolerance / (2b))`.
    pub rho: Option<f64>,
    /// Defaults to the even radii below the horizon.
    pub n_list: Option<Vec<usize>>,
    pub r_min: Option<f64>,
    pub probe_margin: f64,
    pub n0_effective: usize,
    pub n_bar: usize,
    pub n1: f64,
    pub tolerance: f64,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            r: None,
            rho: None,
            n_list: None,
            r_min: None,
            probe_margin: 0.99,
            n0_effective: 4,
            n_bar: 2,
            n1: 1.0,
            tolerance: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), formats: vec![Format::Json, Format::Csv] }
    }
}

impl OutputSection {
    pub fn json(&self) -> bool {
        self.formats.contains(&Format::Json)
    }

    pub fn csv(&self) -> bool {
        self.formats.contains(&Format::Csv)
    }
}

pub fn r_max(spec: &GeneratorSpec) -> usize {
    match *spec {
        GeneratorSpec::Tree { radius, .. } | GeneratorSpec::Tiling { radius, .. } => radius,
        GeneratorSpec::Line { extent } => extent / 2,
        GeneratorSpec::Grid { side } => side.saturating_sub(1),
    }
}

/// 1-based line of `key` inside `[section]`, or of the section header, or
/// of a top-level key when `section` is empty.
pub fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header_line = Some(i + 1);
            }
            continue;
        }
        let name = line.split('=').next().unwrap_or("").trim();
        if current == section && !key.is_empty() && name == key && line.contains('=') {
            return i + 1;
        }
    }
    header_line.unwrap_or(1)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        Self::parse(&text, &shown)
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let message = match e.span() {
                Some(span) => {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}: {}", e.message())
                }
                None => e.message().to_string(),
            };
            ConfigError::Parse { path: path.to_string(), message }
        })?;
        cfg.validate(text, path)?;
        Ok(cfg)
    }

    fn validate(&self, text: &str, path: &str) -> Result<(), ConfigError> {
        let fail = |section: &str, key: &str, message: String| ConfigError::Invalid {
            path: path.to_string(),
            line: locate(text, section, key),
            message,
        };
        let r_max = r_max(&self.graph);
        if let Some(h) = self.geometry.horizon {
            if h == 0 || h > r_max {
                return Err(fail("geometry", "horizon", format!("horizon {h} must lie in 1..={r_max} (R_max)")));
            }
        }
        if let Some(e) = self.geometry.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(fail("geometry", "epsilon", format!("epsilon must be positive, got {e}")));
            }
        }
        if !(self.potential.c0 < self.potential.c1) {
            return Err(fail("potential", "c1", format!("need c0 < c1, got {} and {}", self.potential.c0, self.potential.c1)));
        }
        if let Some(list) = &self.pipeline.n_list {
            if list.is_empty() {
                return Err(fail("pipeline", "n_list", "n_list is empty".into()));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(fail("pipeline", "n_list", "n_list must be strictly increasing".into()));
            }
            let top = *list.last().unwrap();
            let horizon = self.geometry.horizon.unwrap_or(r_max.saturating_sub(1));
            if top + 1 > horizon {
                return Err(fail("pipeline", "n_list", format!("largest N = {top} needs a horizon of at least {}", top + 1)));
            }
        }
        if !(self.pipeline.tolerance > 0.0) {
            return Err(fail("pipeline", "tolerance", "tolerance must be positive".into()));
        }
        if !(self.pipeline.probe_margin > 0.0 && self.pipeline.probe_margin < 1.0) {
            return Err(fail("pipeline", "probe_margin", "probe_margin must lie in (0, 1)".into()));
        }
        if let Some(rho) = self.pipeline.rho {
            if !(rho > 0.0) {
                return Err(fail("pipeline", "rho", "rho must be positive".into()));
            }
        }
        if self.output.formats.is_empty() {
            return Err(fail("output", "formats", "at least one output format is needed".into()));
        }
        if let Err(e) = self.solver.validate(None) {
            return Err(fail("solver", "", e.to_string()));
        }
        Ok(())
    }

    /// Canonical JSON form, hashed into the manifest.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string_pretty(&value).expect("value serializes") + "\n"
    }
}
