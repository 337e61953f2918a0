use std::fs;
use std::path::{Path, PathBuf};

use hiertree::hier::Hierarchomorphism;
use hiertree::measure::CylinderMeasure;
use hiertree::tree::{parse_length, Length, TreeFamily};
use serde::{Deserialize, Serialize};

/// Problems with the configuration; these map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad family {0:?}: expected t<p>, freegroup:<l1>,<l2> or a JSON file")]
    Family(String),
    #[error("bad lambda list {0:?}: expected a,b,c or start:stop:step")]
    Lambda(String),
    #[error("bad measure {0:?}: expected uniform, zero or a JSON file")]
    Measure(String),
    #[error("{0}")]
    Core(#[from] hiertree::Error),
    #[error("bad config file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything a command needs. Loaded from a JSON file and then overridden
/// field by field from the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: String,
    pub lambda: String,
    pub depth: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub element: Option<PathBuf>,
    pub measure: String,
    pub tol: Option<f64>,
    pub expect: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: "t2".into(),
            lambda: "0.8".into(),
            depth: None,
            seed: 1,
            trials: 20,
            element: None,
            measure: "uniform".into(),
            tol: None,
            expect: None,
            out: None,
            format: Format::Csv,
        }
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(&read(path)?)?)
    }

    pub fn family(&self) -> Result<TreeFamily, ConfigError> {
        parse_family(&self.family)
    }

    pub fn lambdas(&self) -> Result<Vec<f64>, ConfigError> {
        parse_lambdas(&self.lambda)
    }

    pub fn depth_or(&self, default: usize) -> usize {
        self.depth.unwrap_or(default)
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// The element given by `--element`, if any.
    pub fn element(&self, family: &TreeFamily) -> Result<Option<Hierarchomorphism>, ConfigError> {
        match &self.element {
            Some(p) => Ok(Some(Hierarchomorphism::from_json(family, &read(p)?)?)),
            None => Ok(None),
        }
    }

    pub fn measure(&self, family: &TreeFamily) -> Result<CylinderMeasure, ConfigError> {
        match self.measure.as_str() {
            "uniform" => Ok(CylinderMeasure::uniform()),
            "zero" => Ok(CylinderMeasure::zero(hiertree::tree::Cut::root())),
            other => {
                let path = Path::new(other);
                if !path.exists() {
                    return Err(ConfigError::Measure(other.into()));
                }
                Ok(CylinderMeasure::from_json(family, &read(path)?)?)
            }
        }
    }
}

/// `t<p>` (optionally written `preset:t<p>`), `freegroup:<l1>,<l2>` with
/// rational lengths, or a path to a family JSON file.
pub fn parse_family(s: &str) -> Result<TreeFamily, ConfigError> {
    let name = s.strip_prefix("preset:").unwrap_or(s);
    if let Some(p) = name.strip_prefix('t').and_then(|p| p.parse::<usize>().ok()) {
        return Ok(TreeFamily::bruhat_tits(p)?);
    }
    if let Some(rest) = name.strip_prefix("freegroup") {
        let lengths = rest.strip_prefix(':').unwrap_or("1,1");
        let parts: Vec<Option<Length>> = lengths.split(',').map(|x| parse_length(x.trim())).collect();
        return match parts.as_slice() {
            [Some(l1), Some(l2)] => Ok(TreeFamily::free_group(*l1, *l2)?),
            _ => Err(ConfigError::Family(s.into())),
        };
    }
    let path = Path::new(s);
    if path.exists() {
        return Ok(TreeFamily::from_json(&read(path)?)?);
    }
    Err(ConfigError::Family(s.into()))
}

/// A comma list `0.5,0.8` or an inclusive range `start:stop:step`.
pub fn parse_lambdas(s: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::Lambda(s.into());
    let out: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let [start, stop, step] = parts.as_slice() else { return Err(bad()) };
        if *step <= 0.0 || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounded so that 0.1:0.9:0.1 gives 0.3 rather than 0.30000000000000004.
        (0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(bad());
    }
    Ok(out)
}
