//! One module per subcommand. Each returns the JSON summary that `main`
//! prints; artifacts go under the configured output directory.

pub mod augment;
pub mod cluster;
pub mod gradcheck;
pub mod loss;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use psda_core::embeddings::{parse_conllu_lenient, EmbeddingError};
use psda_core::{ClusterModel, SentenceRecord, VocabStore};
use serde_json::Value;

use crate::config::PipelineConfig;
use crate::error::CliError;

pub const MODEL_FILE: &str = "model.psda";

pub(crate) fn output_dir(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    Ok(cfg.output_dir.clone())
}

pub(crate) fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn load_stores(cfg: &PipelineConfig) -> Result<BTreeMap<String, VocabStore>, CliError> {
    cfg.require_embeddings()?;
    let mut stores = BTreeMap::new();
    for (lang, path) in &cfg.embeddings {
        stores.insert(lang.clone(), VocabStore::load(path, lang)?);
    }
    Ok(stores)
}

/// Every configured corpus, parsed leniently; malformed blocks come back as errors.
pub(crate) fn load_corpus(cfg: &PipelineConfig) -> Result<(Vec<SentenceRecord>, Vec<EmbeddingError>), CliError> {
    cfg.require_corpus()?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (lang, path) in &cfg.corpus {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let (ok, bad) = parse_conllu_lenient(&text, lang);
        records.extend(ok);
        errors.extend(bad);
    }
    Ok((records, errors))
}

pub(crate) fn model_path(cfg: &PipelineConfig, model: Option<&Path>) -> PathBuf {
    model.map_or_else(|| cfg.output_dir.join(MODEL_FILE), Path::to_path_buf)
}

pub(crate) fn load_model(path: &Path) -> Result<ClusterModel, CliError> {
    if !path.is_file() {
        return Err(CliError::MissingPath {
            what: "model".into(),
            path: path.display().to_string(),
            message: "no such file".into(),
        });
    }
    Ok(ClusterModel::load(path)?)
}
