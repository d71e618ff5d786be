use psda_core::seed::derive_seed;
use psda_core::{build_cluster_model, LanguageTaxonomy, PosProjection, PosTagging, StageClusters};
use serde_json::{json, Value};

use super::{load_corpus, load_stores, output_dir, write_json, MODEL_FILE};
use crate::config::PipelineConfig;
use crate::error::CliError;

fn stage_summary(stage: &str, s: &StageClusters) -> Value {
    json!({
        "stage": stage,
        "scope": s.scope_id,
        "elements": s.elements.len(),
        "clusters": s.clusters.len(),
        "k_requested": s.k_requested,
        "k_used": s.k_used,
        "weight_sum": s.weight_sum(),
        "em_iterations": s.em_iterations,
        "converged": s.converged,
        "log_likelihood": s.log_likelihood,
    })
}

pub fn run(cfg: &PipelineConfig) -> Result<Value, CliError> {
    let tax = LanguageTaxonomy::load(cfg.require_taxonomy()?)?;
    let stores = load_stores(cfg)?;
    let projection = PosProjection::seeded(cfg.pos_dim, derive_seed(cfg.seed, "pos"))?;
    let (tagging, corpus_errors) = if cfg.corpus.is_empty() {
        (PosTagging::new(projection), 0)
    } else {
        let (records, errors) = load_corpus(cfg)?;
        (PosTagging::from_corpus(projection, &records), errors.len())
    };

    let mut model = build_cluster_model(&stores, &tagging, &tax, cfg.k_policy, &cfg.gmm_config())?;
    model.provenance = cfg.echo();

    let out = output_dir(cfg)?;
    let model_path = out.join(MODEL_FILE);
    model.save(&model_path).map_err(|e| CliError::io(&model_path, e))?;

    let mut stages = Vec::new();
    for s in model.single.values() {
        stages.push(stage_summary("single", s));
    }
    for s in model.family.values() {
        stages.push(stage_summary("family", s));
    }
    stages.push(stage_summary("multi", &model.multi));
    let untagged: usize = stores
        .iter()
        .map(|(lang, store)| store.words().iter().filter(|w| tagging.tag(lang, w).is_none()).count())
        .sum();
    let summary = json!({
        "command": "cluster",
        "model": model_path.display().to_string(),
        "languages": stores.keys().collect::<Vec<_>>(),
        "words": model.word_count(),
        "untagged_words": untagged,
        "corpus_parse_errors": corpus_errors,
        "stages": stages,
        "warnings": model.warnings,
        "config": cfg.echo(),
    });
    write_json(&out.join("cluster_summary.json"), &summary)?;
    Ok(summary)
}
