use std::path::Path;

use serde_json::{json, Value};

use super::{load_model, model_path, output_dir};
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::report::{rows_csv, scatter_svg, stage_csv, stage_metrics, word_rows};

pub fn run(cfg: &PipelineConfig, model: Option<&Path>) -> Result<Value, CliError> {
    let model_file = model_path(cfg, model);
    let model = load_model(&model_file)?;
    let rows = word_rows(&model);
    let metrics = stage_metrics(&model);
    let pairs = cfg.echo();

    let out = output_dir(cfg)?;
    let write = |name: &str, text: String| {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    };
    write("report.csv", rows_csv(&rows, &pairs))?;
    write("stage_metrics.csv", stage_csv(&metrics, &pairs))?;
    write("projection.svg", scatter_svg(&rows, model.multi.clusters.len(), &pairs))?;

    let files: Vec<String> =
        ["report.csv", "stage_metrics.csv", "projection.svg"].iter().map(|f| out.join(f).display().to_string()).collect();
    let opt = |v: Option<f64>| v.map_or(Value::Null, |v| json!(v));
    Ok(json!({
        "command": "report",
        "model": model_file.display().to_string(),
        "rows": rows.len(),
        "multi_clusters": model.multi.clusters.len(),
        "files": files,
        "stages": metrics.iter().map(|m| json!({
            "stage": m.stage,
            "scope": m.scope,
            "clusters": m.clusters,
            "mean_intra": m.mean_intra,
            "mean_nearest_other": opt(m.mean_nearest_other),
            "silhouette": opt(m.silhouette),
        })).collect::<Vec<_>>(),
        "config": pairs,
    }))
}
