//! Trained surrogate: network, feature normalisation, output scaling and file format.
//!
//! Model files are JSON documents:
//!
//! | field | content |
//! |---|---|
//! | `format_version` | integer, currently 1 |
//! | `layer_sizes` | `[n_in, hidden, 2]` |
//! | `activation` | always `"tansig"` (tanh on hidden and output layers) |
//! | `input_mode` | `"6in"` or `"7in"` |
//! | `rho_t_db` | total SNR of a `6in` model, `null` for `7in` |
//! | `hidden_weights` | `hidden` rows of `n_in` weights |
//! | `hidden_bias` | `hidden` values |
//! | `output_weights` | 2 rows of `hidden` weights, alpha row first |
//! | `output_bias` | 2 values |
//! | `input_min`, `input_max` | per-feature range mapped onto `[-1, 1]` |
//! | `output_ranges` | `{"alpha": [lo, hi], "beta": [lo, hi]}` mapped from `(-1, 1)` |
//! | `output_clamp` | same layout, final clamp on predictions |
//! | `metadata` | `train_mse`, `test_mse`, `regression_r`, `dataset_hash`, `train_records`, `test_records`, `epochs`, `stop_reason` |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::{features, InputMode};
use super::network::{Mlp, OpCount};
use crate::config::SplitPoint;
use crate::error::{Error, Result};
use crate::model::ChannelParams;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Affine map targets of the two tanh outputs.
pub const ALPHA_RANGE: (f64, f64) = (0.0, 0.5);
pub const BETA_RANGE: (f64, f64) = (0.0, 1.0);
/// Predictions are clamped into the optimiser's search box.
pub const ALPHA_CLAMP: (f64, f64) = (0.005, 0.495);
pub const BETA_CLAMP: (f64, f64) = (0.01, 0.99);

fn to_unit(v: f64, (lo, hi): (f64, f64)) -> f64 {
    2.0 * (v - lo) / (hi - lo) - 1.0
}

fn from_unit(t: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (t + 1.0) * (hi - lo) / 2.0
}

/// Scaled network targets of a labelled split.
pub fn scale_labels(alpha: f64, beta: f64) -> [f64; 2] {
    [to_unit(alpha, ALPHA_RANGE), to_unit(beta, BETA_RANGE)]
}

/// Maps raw network outputs to a feasible `(alpha, beta)`.
pub fn unscale_outputs(t: [f64; 2]) -> SplitPoint {
    SplitPoint {
        alpha: from_unit(t[0], ALPHA_RANGE).clamp(ALPHA_CLAMP.0, ALPHA_CLAMP.1),
        beta: from_unit(t[1], BETA_RANGE).clamp(BETA_CLAMP.0, BETA_CLAMP.1),
    }
}

/// Per-feature min/max normalisation onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut it = rows.into_iter();
        let first = it.next().ok_or_else(|| Error::domain("normalize", "no feature rows"))?;
        let (mut min, mut max) = (first.to_vec(), first.to_vec());
        for row in it {
            for (i, &v) in row.iter().enumerate() {
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        Ok(Self { min, max })
    }

    /// Constant features map to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { to_unit(v, (lo, hi)) } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub train_mse: f64,
    pub test_mse: f64,
    pub regression_r: f64,
    pub dataset_hash: String,
    pub train_records: usize,
    pub test_records: usize,
    pub epochs: usize,
    pub stop_reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub(crate) net: Mlp,
    pub(crate) mode: InputMode,
    pub(crate) rho_t_db: Option<f64>,
    pub(crate) norm: Normalizer,
    pub metadata: ModelMetadata,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Range2 {
    alpha: (f64, f64),
    beta: (f64, f64),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    layer_sizes: [usize; 3],
    activation: String,
    input_mode: InputMode,
    rho_t_db: Option<f64>,
    hidden_weights: Vec<Vec<f64>>,
    hidden_bias: Vec<f64>,
    output_weights: Vec<Vec<f64>>,
    output_bias: Vec<f64>,
    input_min: Vec<f64>,
    input_max: Vec<f64>,
    output_ranges: Range2,
    output_clamp: Range2,
    metadata: ModelMetadata,
}

impl SurrogateModel {
    pub fn new(net: Mlp, mode: InputMode, rho_t_db: Option<f64>, norm: Normalizer, metadata: ModelMetadata) -> Result<Self> {
        if net.n_inputs() != mode.n_inputs() || norm.min.len() != mode.n_inputs() || norm.max.len() != mode.n_inputs() {
            return Err(Error::Model(format!(
                "{mode} model needs {} inputs, network has {} and normaliser {}",
                mode.n_inputs(),
                net.n_inputs(),
                norm.min.len()
            )));
        }
        if (mode == InputMode::Channel) != rho_t_db.is_some() {
            return Err(Error::Model(format!("{mode} model has inconsistent SNR tag {rho_t_db:?}")));
        }
        Ok(Self {
            net,
            mode,
            rho_t_db,
            norm,
            metadata,
        })
    }

    pub fn mode(&self) -> InputMode {
        self.mode
    }

    /// SNR a `6in` model was trained for.
    pub fn rho_t_db(&self) -> Option<f64> {
        self.rho_t_db
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.norm
    }

    /// Raw network outputs for an unnormalised feature vector.
    pub fn forward_raw(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.net.n_inputs() {
            return Err(Error::domain(
                "predict",
                format!("{} model takes {} features, got {}", self.mode, self.net.n_inputs(), x.len()),
            ));
        }
        Ok(self.net.forward(&self.norm.apply(x)))
    }

    /// `rho_t_db` must be given to a `7in` model and omitted for a `6in` one.
    pub fn predict(&self, ch: &ChannelParams, rho_t_db: Option<f64>) -> Result<SplitPoint> {
        match (self.mode, rho_t_db) {
            (InputMode::Channel, Some(_)) => {
                return Err(Error::domain("predict", "6in model takes no SNR feature"));
            }
            (InputMode::ChannelAndSnr, None) => {
                return Err(Error::domain("predict", "7in model needs the SNR feature"));
            }
            _ => {}
        }
        Ok(unscale_outputs(self.forward_raw(&features(ch, rho_t_db))?))
    }

    pub fn op_count(&self) -> OpCount {
        self.net.op_count()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            layer_sizes: [self.net.n_inputs(), self.net.hidden(), 2],
            activation: "tansig".into(),
            input_mode: self.mode,
            rho_t_db: self.rho_t_db,
            hidden_weights: self.net.hidden_weights(),
            hidden_bias: self.net.hidden_bias(),
            output_weights: self.net.output_weights(),
            output_bias: self.net.output_bias(),
            input_min: self.norm.min.clone(),
            input_max: self.norm.max.clone(),
            output_ranges: Range2 {
                alpha: ALPHA_RANGE,
                beta: BETA_RANGE,
            },
            output_clamp: Range2 {
                alpha: ALPHA_CLAMP,
                beta: BETA_CLAMP,
            },
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model file is plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.activation != "tansig" {
            return Err(Error::Model(format!("unsupported activation {:?}", file.activation)));
        }
        if file.output_ranges.alpha != ALPHA_RANGE
            || file.output_ranges.beta != BETA_RANGE
            || file.output_clamp.alpha != ALPHA_CLAMP
            || file.output_clamp.beta != BETA_CLAMP
        {
            return Err(Error::Model("unsupported output scaling".into()));
        }
        let net = Mlp::from_parts(&file.hidden_weights, &file.hidden_bias, &file.output_weights, &file.output_bias)?;
        if file.layer_sizes != [net.n_inputs(), net.hidden(), 2] {
            return Err(Error::Model(format!("layer_sizes {:?} disagree with the weights", file.layer_sizes)));
        }
        let norm = Normalizer {
            min: file.input_min,
            max: file.input_max,
        };
        Self::new(net, file.input_mode, file.rho_t_db, norm, file.metadata)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Model(format!("{}: {e}", path.display())))
    }

    /// Conventional file name inside a model directory.
    pub fn file_name(&self) -> String {
        match self.rho_t_db {
            Some(rho) => format!("surrogate_6in_{rho}dB.json"),
            None => "surrogate_7in.json".into(),
        }
    }
}

/// Models loaded from one file or a directory of `*.json` files.
#[derive(Debug, Clone)]
pub struct ModelSet {
    models: Vec<SurrogateModel>,
    source: PathBuf,
}

impl ModelSet {
    pub fn new(models: Vec<SurrogateModel>, source: impl Into<PathBuf>) -> Result<Self> {
        let source = source.into();
        if models.is_empty() {
            return Err(Error::Model(format!("no surrogate models in {}", source.display())));
        }
        Ok(Self { models, source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::Model(format!("model path {} does not exist", path.display())));
        }
        if path.is_file() {
            return Self::new(vec![SurrogateModel::load(path)?], path);
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let models = files.iter().map(SurrogateModel::load).collect::<Result<Vec<_>>>()?;
        Self::new(models, path)
    }

    pub fn models(&self) -> &[SurrogateModel] {
        &self.models
    }

    pub fn source(&self) -> &Path {
        &self.source
    }

    /// A `7in` model if present, otherwise the `6in` model trained nearest to
    /// `rho_t_db` (the lower SNR on a tie).
    pub fn select(&self, rho_t_db: f64) -> &SurrogateModel {
        if let Some(m) = self.models.iter().find(|m| m.mode == InputMode::ChannelAndSnr) {
            return m;
        }
        self.models
            .iter()
            .min_by(|a, b| {
                let da = (a.rho_t_db.unwrap_or(f64::NAN) - rho_t_db).abs();
                let db = (b.rho_t_db.unwrap_or(f64::NAN) - rho_t_db).abs();
                da.total_cmp(&db).then(a.rho_t_db.unwrap_or(0.0).total_cmp(&b.rho_t_db.unwrap_or(0.0)))
            })
            .expect("model set is never empty")
    }

    pub fn predict(&self, ch: &ChannelParams, rho_t_db: f64) -> Result<SplitPoint> {
        let m = self.select(rho_t_db);
        match m.mode {
            InputMode::Channel => m.predict(ch, None),
            InputMode::ChannelAndSnr => m.predict(ch, Some(rho_t_db)),
        }
    }
}
