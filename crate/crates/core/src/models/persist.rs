use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Classifier, ForestModel, LinearModel};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "snake_case")]
pub enum SavedModel {
    Linear(LinearModel),
    Forest {
        feature_names: Vec<String>,
        forest: ForestModel,
    },
}

impl SavedModel {
    pub fn feature_names(&self) -> &[String] {
        match self {
            SavedModel::Linear(m) => &m.feature_names,
            SavedModel::Forest { feature_names, .. } => feature_names,
        }
    }
}

impl Classifier for SavedModel {
    fn predict_row(&self, row: &[f64]) -> bool {
        match self {
            SavedModel::Linear(m) => m.predict_row(row),
            SavedModel::Forest { forest, .. } => forest.predict_row(row),
        }
    }
}

/// On-disk JSON envelope:
///
/// ```json
/// {"format_version": 1, "model": {"model_type": "linear", "kind": "logistic", ...}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub model: SavedModel,
}

pub fn save_model(path: &Path, model: &SavedModel) -> Result<()> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let text = serde_json::to_string_pretty(&file)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let version = value.get("format_version").and_then(|v| v.as_u64());
    if version != Some(u64::from(MODEL_FORMAT_VERSION)) {
        return Err(Error::Config(format!(
            "{}: unsupported model format version {version:?}",
            path.display()
        )));
    }
    let file: ModelFile = serde_json::from_value(value)?;
    Ok(file.model)
}
