use std::fs;
use std::path::{Path, PathBuf};

use fairpipe_core::{Model, PipelineConfig, RecordTable};
use serde::{Deserialize, Serialize};

use crate::error::{FileError, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Reads a comma-separated file with a header row. Cells are kept verbatim,
/// including the `?` missing marker.
pub fn load_csv(path: impl AsRef<Path>) -> Result<RecordTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| FileError::io(path, e))?;
    read_csv(file, path)
}

pub(crate) fn read_csv(reader: impl std::io::Read, path: &Path) -> Result<RecordTable> {
    let csv_err = |source| FileError::Csv { path: path.to_path_buf(), source };
    let table_err = |source| FileError::Table { path: path.to_path_buf(), source };
    // Flexible so that short/long rows reach RecordTable, which reports them
    // with the data-row index.
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let mut table = RecordTable::new(headers.iter()).map_err(table_err)?;
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record).map_err(csv_err)? {
        table.push_row(record.iter()).map_err(table_err)?;
    }
    Ok(table)
}

/// Parses a TOML pipeline config and validates it. Unknown keys are errors.
pub fn parse_config(text: &str, origin: &Path) -> Result<PipelineConfig> {
    let config: PipelineConfig = toml::from_str(text)
        .map_err(|e| FileError::Config { path: origin.to_path_buf(), message: e.to_string() })?;
    config.validate().map_err(|e| FileError::Config { path: origin.to_path_buf(), message: e.to_string() })?;
    Ok(config)
}

/// Loads a config file. A relative `data_path` is resolved against the
/// directory holding the config.
pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    let mut config = parse_config(&text, path)?;
    let data = Path::new(&config.data_path);
    if data.is_relative() {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            config.data_path = dir.join(data).to_string_lossy().into_owned();
        }
    }
    Ok(config)
}

/// Versioned on-disk form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub learner: String,
    /// `original` (unit weights) or `transformed` (reweighed).
    pub variant: String,
    pub model: Model,
}

impl ModelFile {
    pub fn new(learner: &str, variant: &str, model: Model) -> Self {
        Self { format_version: MODEL_FORMAT_VERSION, learner: learner.into(), variant: variant.into(), model }
    }
}

pub fn save_model(path: impl AsRef<Path>, file: &ModelFile) -> Result<()> {
    let path = path.as_ref();
    let text =
        serde_json::to_string_pretty(file).map_err(|source| FileError::Serialize { what: "model", source })?;
    fs::write(path, text + "\n").map_err(|e| FileError::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let model_err = |message: String| FileError::Model { path: path.to_path_buf(), message };
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| model_err(e.to_string()))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
        Some(v) => return Err(model_err(format!("unsupported format_version {v}"))),
        None => return Err(model_err("missing format_version".into())),
    }
    serde_json::from_value(value).map_err(|e| model_err(e.to_string()))
}

/// File name used for a model inside the output directory.
pub fn model_file_name(learner: &str, variant: &str) -> PathBuf {
    let safe: String = learner.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    PathBuf::from(format!("{safe}.{variant}.json"))
}
