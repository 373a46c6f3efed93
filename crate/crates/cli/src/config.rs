use std::path::{Path, PathBuf};

use birkhoff::models::{CircleMapSpec, IidSpec, MarkovSftSpec, ModelSpec, RmpSpec};
use birkhoff::polyexp::TestFunction;
use birkhoff::validate::MlcltForm;
use serde::Deserialize;

use crate::CliError;

pub const MAX_ORDER: usize = 6;

/// Model table of a run config. `sft` accepts either a forward
/// `transition` matrix or an `incidence`/`potential` pair.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSection {
    Sft {
        #[serde(default)]
        transition: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        incidence: Option<Vec<Vec<u8>>>,
        #[serde(default)]
        potential: Option<Vec<Vec<f64>>>,
        observable: Vec<Vec<f64>>,
        #[serde(default)]
        lattice: bool,
    },
    Iid {
        probabilities: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        lattice: bool,
    },
    Circle {
        degree: usize,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        grid: usize,
        fourier: usize,
        #[serde(default)]
        burn_in: usize,
    },
    Rmp {
        matrices: Vec<[[f64; 2]; 2]>,
        probabilities: Vec<f64>,
        grid: usize,
        /// Start direction (angle) for sampling and default `ψ`.
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        burn_in: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSection {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub psi: Option<Vec<f64>>,
    #[serde(default)]
    pub xi: Option<Vec<f64>>,
}

fn default_order() -> usize {
    2
}

impl Default for ExpansionSection {
    fn default() -> Self {
        Self { order: default_order(), psi: None, xi: None }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub g: Option<TestFunction>,
    #[serde(default)]
    pub form: Option<MlcltForm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("birkhoff-out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: toml::Value,
    #[serde(default)]
    expansion: ExpansionSection,
    #[serde(default)]
    experiment: ExperimentSection,
    #[serde(default)]
    output: OutputSection,
}

/// A parsed and checked run config.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    pub model: ModelSection,
    pub expansion: ExpansionSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

impl ModelSection {
    pub fn spec(&self) -> Result<ModelSpec, CliError> {
        Ok(match self.clone() {
            ModelSection::Sft { transition, incidence, potential, observable, lattice } => match (transition, incidence, potential) {
                (Some(p), None, None) => ModelSpec::Sft(MarkovSftSpec::from_transition_matrix(&p, observable, lattice)),
                (None, Some(incidence), Some(potential)) => ModelSpec::Sft(MarkovSftSpec { incidence, potential, observable, lattice }),
                _ => {
                    return Err(CliError::new(
                        "CONFIG_INVALID",
                        "model.kind = \"sft\" needs either `transition` or both `incidence` and `potential`",
                    ))
                }
            },
            ModelSection::Iid { probabilities, values, lattice } => ModelSpec::Iid(IidSpec { probabilities, values, lattice }),
            ModelSection::Circle { degree, cos, sin, grid, fourier, .. } => {
                ModelSpec::Circle(CircleMapSpec { degree, cos, sin, grid, fourier })
            }
            ModelSection::Rmp { matrices, probabilities, grid, .. } => ModelSpec::Rmp(RmpSpec { matrices, probabilities, grid }),
        })
    }

    pub fn burn_in(&self) -> usize {
        match *self {
            ModelSection::Circle { burn_in, .. } | ModelSection::Rmp { burn_in, .. } => burn_in,
            _ => 0,
        }
    }

    pub fn x0(&self) -> f64 {
        match *self {
            ModelSection::Rmp { x0, .. } => x0,
            _ => 0.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::new("CONFIG_NOT_FOUND", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// Parse config text; `path` anchors relative `model.file` references.
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::new("CONFIG_PARSE", e.to_string()))?;
        let model = resolve_model(raw.model, path)?;
        let mut output = raw.output;
        if let Some(dir) = std::env::var_os("OUTPUT_DIR") {
            output.dir = PathBuf::from(dir);
        }
        let cfg = Self { path: path.to_path_buf(), model, expansion: raw.expansion, experiment: raw.experiment, output };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.expansion.order > MAX_ORDER {
            return Err(CliError::new("CONFIG_INVALID", format!("expansion.order must be at most {MAX_ORDER}")));
        }
        if self.experiment.trials > 0 && self.experiment.seed.is_none() {
            return Err(CliError::new("CONFIG_MISSING_SEED", "experiment.seed is required when experiment.trials > 0"));
        }
        if self.experiment.n_list.iter().any(|&n| n == 0) {
            return Err(CliError::new("CONFIG_INVALID", "experiment.n_list entries must be positive"));
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// `model = { file = "other.cfg" }` loads the `[model]` table of another
/// config, relative to the referencing file.
fn resolve_model(value: toml::Value, path: &Path) -> Result<ModelSection, CliError> {
    if let Some(file) = value.get("file") {
        let file = file.as_str().ok_or_else(|| CliError::new("CONFIG_PARSE", "model.file must be a string"))?;
        let target = path.parent().unwrap_or(Path::new(".")).join(file);
        if !target.is_file() {
            return Err(CliError::new("CONFIG_FILE_NOT_FOUND", format!("model.file {} does not exist", target.display())));
        }
        let text = std::fs::read_to_string(&target).map_err(|e| CliError::new("CONFIG_FILE_NOT_FOUND", e.to_string()))?;
        let inner: toml::Value = toml::from_str(&text).map_err(|e| CliError::new("CONFIG_PARSE", format!("{}: {e}", target.display())))?;
        let table = inner
            .get("model")
            .cloned()
            .ok_or_else(|| CliError::new("CONFIG_PARSE", format!("{} has no [model] table", target.display())))?;
        if table.get("file").is_some() {
            return Err(CliError::new("CONFIG_INVALID", "model.file references may not be nested"));
        }
        return resolve_model(table, &target);
    }
    value.try_into().map_err(|e: toml::de::Error| CliError::new("CONFIG_PARSE", format!("[model]: {e}")))
}

/// JSON Schema of the run config, printed by `--print-schema`.
pub const SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "birkhoff run config (TOML)",
  "type": "object",
  "required": ["model"],
  "additionalProperties": false,
  "properties": {
    "model": {
      "description": "Either a model table or { file = \"path\" } naming another config whose [model] table is used.",
      "oneOf": [
        {
          "type": "object",
          "required": ["file"],
          "additionalProperties": false,
          "properties": { "file": { "type": "string" } }
        },
        {
          "type": "object",
          "required": ["kind", "observable"],
          "additionalProperties": false,
          "properties": {
            "kind": { "const": "sft" },
            "transition": { "description": "forward transition matrix p(y,x); alternative to incidence + potential", "type": "array", "items": { "type": "array", "items": { "type": "number" } } },
            "incidence": { "type": "array", "items": { "type": "array", "items": { "enum": [0, 1] } } },
            "potential": { "description": "g(y,x) on allowed transitions y -> x", "type": "array", "items": { "type": "array", "items": { "type": "number" } } },
            "observable": { "description": "phi(y,x) on transitions y -> x", "type": "array", "items": { "type": "array", "items": { "type": "number" } } },
            "lattice": { "type": "boolean", "default": false }
          }
        },
        {
          "type": "object",
          "required": ["kind", "probabilities", "values"],
          "additionalProperties": false,
          "properties": {
            "kind": { "const": "iid" },
            "probabilities": { "type": "array", "items": { "type": "number", "exclusiveMinimum": 0 } },
            "values": { "type": "array", "items": { "type": "number" } },
            "lattice": { "type": "boolean", "default": false }
          }
        },
        {
          "type": "object",
          "required": ["kind", "degree", "grid", "fourier"],
          "additionalProperties": false,
          "properties": {
            "kind": { "const": "circle" },
            "degree": { "type": "integer", "minimum": 2 },
            "cos": { "description": "coefficients of cos(2 pi k x), k = 1, 2, ...", "type": "array", "items": { "type": "number" } },
            "sin": { "description": "coefficients of sin(2 pi k x), k = 1, 2, ...", "type": "array", "items": { "type": "number" } },
            "grid": { "type": "integer", "minimum": 1 },
            "fourier": { "type": "integer", "minimum": 1 },
            "burn_in": { "type": "integer", "minimum": 0, "default": 0 }
          }
        },
        {
          "type": "object",
          "required": ["kind", "matrices", "probabilities", "grid"],
          "additionalProperties": false,
          "properties": {
            "kind": { "const": "rmp" },
            "matrices": { "type": "array", "items": { "type": "array", "minItems": 2, "maxItems": 2, "items": { "type": "array", "minItems": 2, "maxItems": 2, "items": { "type": "number" } } } },
            "probabilities": { "type": "array", "items": { "type": "number", "exclusiveMinimum": 0 } },
            "grid": { "type": "integer", "minimum": 1 },
            "x0": { "description": "start angle in [0, pi)", "type": "number", "default": 0 },
            "burn_in": { "type": "integer", "minimum": 0, "default": 0 }
          }
        }
      ]
    },
    "expansion": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "order": { "type": "integer", "minimum": 0, "maximum": 6, "default": 2 },
        "psi": { "type": "array", "items": { "type": "number" } },
        "xi": { "type": "array", "items": { "type": "number" } }
      }
    },
    "experiment": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n_list": { "type": "array", "items": { "type": "integer", "minimum": 1 } },
        "trials": { "type": "integer", "minimum": 0, "default": 0 },
        "seed": { "description": "required when trials > 0", "type": "integer", "minimum": 0 },
        "g": {
          "oneOf": [
            { "type": "object", "required": ["family", "center", "width", "height"], "properties": { "family": { "const": "gaussian" }, "center": { "type": "number" }, "width": { "type": "number" }, "height": { "type": "number" } } },
            { "type": "object", "required": ["family", "center", "half_width", "height"], "properties": { "family": { "const": "raised_cosine" }, "center": { "type": "number" }, "half_width": { "type": "number" }, "height": { "type": "number" } } },
            { "type": "object", "required": ["family", "points"], "properties": { "family": { "const": "lattice" }, "points": { "type": "array", "items": { "type": "array", "prefixItems": [{ "type": "integer" }, { "type": "number" }] } } } }
          ]
        },
        "form": { "enum": ["global", "local"] }
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "dir": { "description": "overridden by the OUTPUT_DIR environment variable", "type": "string", "default": "birkhoff-out" },
        "formats": { "type": "array", "items": { "enum": ["json", "csv"] }, "default": ["json", "csv"] }
      }
    }
  }
}
"##;
