use std::collections::BTreeMap;
use std::path::Path;

use psda_core::augment::augment_copies;
use psda_core::{assemble_sentence, build_candidate_index, AugmentedSentence, SentenceRecord};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{load_corpus, load_model, load_stores, model_path, output_dir, write_json};
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::records::{header, JsonlWriter, SentenceLine};

pub const ORIGINAL_FILE: &str = "original.jsonl";
pub const AUGMENTED_FILE: &str = "augmented.jsonl";

fn line(rec: &SentenceRecord, copy: Option<u32>, out: &AugmentedSentence, augmented: bool) -> SentenceLine {
    let (matrix, replacements, skipped) = if augmented {
        (out.augmented.to_rows(), out.replacements.clone(), out.skipped.clone())
    } else {
        (out.original.to_rows(), Vec::new(), Vec::new())
    };
    SentenceLine {
        id: rec.id.clone(),
        copy,
        lang: rec.lang.clone(),
        tokens: rec.tokens.clone(),
        svo: rec.svo,
        replacements,
        skipped,
        matrix,
    }
}

pub fn run(cfg: &PipelineConfig, model: Option<&Path>) -> Result<Value, CliError> {
    let model_file = model_path(cfg, model);
    let model = load_model(&model_file)?;
    let stores = load_stores(cfg)?;
    let (records, parse_errors) = load_corpus(cfg)?;
    let index = build_candidate_index(&model, &stores)?;

    let results: Vec<Result<Vec<AugmentedSentence>, String>> = records
        .par_iter()
        .map(|rec| {
            let store = stores
                .get(&rec.lang)
                .ok_or_else(|| format!("{}: no embeddings for language `{}`", rec.id, rec.lang))?;
            let mat = assemble_sentence(rec, store, cfg.oov_policy).map_err(|e| format!("{}: {e}", rec.id))?;
            augment_copies(rec, &mat, &model, &index, cfg.seed, cfg.copies).map_err(|e| format!("{}: {e}", rec.id))
        })
        .collect();

    let out = output_dir(cfg)?;
    let pairs = cfg.echo();
    let mut orig_w = JsonlWriter::create(&out.join(ORIGINAL_FILE))?;
    let mut aug_w = JsonlWriter::create(&out.join(AUGMENTED_FILE))?;
    orig_w.write(&header("augment", &pairs))?;
    aug_w.write(&header("augment", &pairs))?;

    let mut failures = Vec::new();
    let mut ok_sentences = 0usize;
    let mut augmented_records = 0usize;
    let mut replaced_records = 0usize;
    let mut replaced: BTreeMap<String, usize> = BTreeMap::new();
    let mut skipped: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for (rec, res) in records.iter().zip(&results) {
        let copies = match res {
            Ok(c) => c,
            Err(msg) => {
                failures.push(msg.clone());
                continue;
            }
        };
        ok_sentences += 1;
        if let Some(first) = copies.first() {
            orig_w.sentence(&line(rec, None, first, false))?;
        }
        for (c, a) in copies.iter().enumerate() {
            aug_w.sentence(&line(rec, Some(c as u32), a, true))?;
            augmented_records += 1;
            if !a.replacements.is_empty() {
                replaced_records += 1;
            }
            for r in &a.replacements {
                *replaced.entry(json!(r.role).as_str().unwrap_or_default().to_string()).or_default() += 1;
            }
            for s in &a.skipped {
                let role = json!(s.role).as_str().unwrap_or_default().to_string();
                let reason = json!(s.reason).as_str().unwrap_or_default().to_string();
                *skipped.entry(role).or_default().entry(reason).or_default() += 1;
            }
        }
    }
    orig_w.finish()?;
    aug_w.finish()?;

    let total_roles: usize = replaced.values().sum::<usize>() + skipped.values().flat_map(|m| m.values()).sum::<usize>();
    let summary = json!({
        "command": "augment",
        "model": model_file.display().to_string(),
        "original": out.join(ORIGINAL_FILE).display().to_string(),
        "augmented": out.join(AUGMENTED_FILE).display().to_string(),
        "sentences": records.len() + parse_errors.len(),
        "sentences_ok": ok_sentences,
        "parse_errors": parse_errors.len(),
        "sentence_failures": failures.len(),
        "warnings": parse_errors.iter().map(ToString::to_string).chain(failures.iter().cloned()).collect::<Vec<_>>(),
        "copies": cfg.copies,
        "augmented_records": augmented_records,
        "records_with_replacement": replaced_records,
        "replaced": replaced,
        "skipped": skipped,
        "skipped_fraction": if total_roles == 0 { 0.0 } else {
            skipped.values().flat_map(|m| m.values()).sum::<usize>() as f64 / total_roles as f64
        },
        "config": pairs,
    });
    write_json(&out.join("augment_summary.json"), &summary)?;
    if ok_sentences == 0 && !(failures.is_empty() && parse_errors.is_empty()) {
        return Err(CliError::Input(format!(
            "every sentence failed ({} parse errors, {} sentence failures)",
            parse_errors.len(),
            failures.len()
        )));
    }
    Ok(summary)
}
