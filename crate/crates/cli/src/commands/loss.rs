use std::path::Path;

use psda_core::affinity_regularization;
use psda_core::LossBreakdown;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::augment::{AUGMENTED_FILE, ORIGINAL_FILE};
use super::output_dir;
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::records::{header, read_sentences, GradWriter, JsonlWriter, SentenceLine};

pub const LOSS_FILE: &str = "loss.jsonl";

/// Matches augmented records to originals in stream order. Each original
/// may be followed by any number of augmented copies with its id.
fn pair_up<'a>(
    originals: &'a [SentenceLine],
    augmented: &'a [SentenceLine],
) -> Result<Vec<(&'a SentenceLine, &'a SentenceLine)>, CliError> {
    let mut pairs = Vec::with_capacity(augmented.len());
    let mut i = 0usize;
    let mut used = false;
    for aug in augmented {
        if used && originals.get(i).is_some_and(|o| o.id != aug.id) {
            i += 1;
        }
        match originals.get(i) {
            Some(o) if o.id == aug.id => {
                pairs.push((o, aug));
                used = true;
            }
            Some(o) => {
                return Err(CliError::Input(format!(
                    "streams diverge at augmented id `{}` (expected `{}`)",
                    aug.id, o.id
                )))
            }
            None => return Err(CliError::Input(format!("augmented id `{}` has no original", aug.id))),
        }
    }
    let matched = if used { i + 1 } else { i };
    if let Some(o) = originals.get(matched) {
        return Err(CliError::Input(format!("original id `{}` has no augmented record", o.id)));
    }
    Ok(pairs)
}

fn pair_record(orig: &SentenceLine, aug: &SentenceLine, b: &LossBreakdown, grad_offset: Option<u64>) -> Value {
    let mut v = json!({
        "kind": "pair",
        "id": aug.id,
        "copy": aug.copy,
        "lang": aug.lang,
        "replacements": aug.replacements.len(),
        "loss_ot": b.loss_ot,
        "loss_eig": b.loss_eig,
        "loss_dis": b.loss_dis,
        "loss_reg": b.loss_reg,
        "loss_task": b.loss_task,
        "loss_total": b.loss_total,
        "rho": b.rho,
        "lambda": b.lambda,
        "sinkhorn_iterations": b.sinkhorn_iterations,
        "marginal_error": b.marginal_error,
        "non_convergence": b.non_convergence,
        "log_domain": b.log_domain,
        "eig_k": b.eig_k,
        "degenerate_spectrum": b.degenerate_spectrum,
        "tokens": orig.tokens.len(),
    });
    if let Some(off) = grad_offset {
        v["grad_offset"] = json!(off);
    }
    v
}

pub fn run(
    cfg: &PipelineConfig,
    original: Option<&Path>,
    augmented: Option<&Path>,
    grad_out: Option<&Path>,
    task_loss: f64,
) -> Result<Value, CliError> {
    if !task_loss.is_finite() {
        return Err(CliError::Usage(format!("--task-loss must be finite, got {task_loss}")));
    }
    let orig_path = original.map_or_else(|| cfg.output_dir.join(ORIGINAL_FILE), Path::to_path_buf);
    let aug_path = augmented.map_or_else(|| cfg.output_dir.join(AUGMENTED_FILE), Path::to_path_buf);
    let originals = read_sentences(&orig_path)?;
    let augmented = read_sentences(&aug_path)?;
    let pairs = pair_up(&originals, &augmented)?;

    let results: Vec<Result<LossBreakdown, String>> = pairs
        .par_iter()
        .map(|(o, a)| {
            let om = o.matrix().map_err(|e| e.to_string())?;
            let am = a.matrix().map_err(|e| e.to_string())?;
            affinity_regularization(&om, &am, &cfg.ot)
                .and_then(|b| b.with_task_loss(task_loss))
                .map_err(|e| format!("{}: {e}", a.id))
        })
        .collect();

    let out = output_dir(cfg)?;
    let pairs_cfg = cfg.echo();
    let mut w = JsonlWriter::create(&out.join(LOSS_FILE))?;
    w.write(&header("loss", &pairs_cfg))?;
    let mut grad = grad_out.map(GradWriter::create).transpose()?;

    let mut n = 0usize;
    let mut sums = [0.0f64; 6];
    let mut errors = Vec::new();
    let mut non_converged = 0usize;
    let mut replaced_pairs = 0usize;
    let mut max_dis_replaced = 0.0f64;
    for ((o, a), res) in pairs.iter().zip(&results) {
        match res {
            Ok(b) => {
                let off = grad.as_mut().map(|g| g.push(&b.grad_augmented)).transpose()?;
                w.write(&pair_record(o, a, b, off))?;
                n += 1;
                for (s, v) in sums.iter_mut().zip([b.loss_ot, b.loss_eig, b.loss_dis, b.loss_reg, b.loss_task, b.loss_total]) {
                    *s += v;
                }
                non_converged += usize::from(b.non_convergence);
                if !a.replacements.is_empty() {
                    replaced_pairs += 1;
                    max_dis_replaced = max_dis_replaced.max(b.loss_dis);
                }
            }
            Err(msg) => {
                w.write(&json!({ "kind": "pair_error", "id": a.id, "copy": a.copy, "message": msg }))?;
                errors.push(msg.clone());
            }
        }
    }
    let mean = |s: f64| if n == 0 { Value::Null } else { json!(s / n as f64) };
    let aggregate = json!({
        "kind": "aggregate",
        "pairs": n,
        "errors": errors.len(),
        "non_converged": non_converged,
        "replaced_pairs": replaced_pairs,
        "max_loss_dis_replaced": max_dis_replaced,
        "mean_loss_ot": mean(sums[0]),
        "mean_loss_eig": mean(sums[1]),
        "mean_loss_dis": mean(sums[2]),
        "mean_loss_reg": mean(sums[3]),
        "mean_loss_task": mean(sums[4]),
        "mean_loss_total": mean(sums[5]),
        "rho": cfg.ot.rho,
        "lambda": cfg.ot.lambda,
    });
    w.write(&aggregate)?;
    w.finish()?;
    if let Some(g) = grad {
        g.finish()?;
    }

    let mut summary = aggregate;
    summary["command"] = json!("loss");
    summary["output"] = json!(out.join(LOSS_FILE).display().to_string());
    summary["error_messages"] = json!(errors);
    summary["config"] = json!(pairs_cfg);
    if n == 0 && !errors.is_empty() {
        return Err(CliError::Input(format!("every pair failed; first: {}", errors[0])));
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use psda_core::Svo;

    fn s(id: &str) -> SentenceLine {
        SentenceLine {
            id: id.into(),
            copy: None,
            lang: "en".into(),
            tokens: vec!["a".into()],
            svo: Svo::default(),
            replacements: vec![],
            skipped: vec![],
            matrix: vec![vec![1.0]],
        }
    }

    #[test]
    fn pairs_copies_in_order() {
        let o = [s("a"), s("b")];
        let a = [s("a"), s("a"), s("b"), s("b"), s("b")];
        let p = pair_up(&o, &a).unwrap();
        assert_eq!(p.len(), 5);
        assert!(p.iter().all(|(x, y)| x.id == y.id));
    }

    #[test]
    fn names_first_divergent_id() {
        let o = [s("a"), s("b")];
        let a = [s("a"), s("c")];
        let e = pair_up(&o, &a).unwrap_err().to_string();
        assert!(e.contains("`c`"), "{e}");
        let e = pair_up(&o, &[s("a")]).unwrap_err().to_string();
        assert!(e.contains("`b`"), "{e}");
        assert!(pair_up(&o, &o).is_ok());
    }
}
