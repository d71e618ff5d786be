use psda_core::otreg::gradcheck::{run_gradcheck, GradcheckConfig};
use serde_json::{json, Value};

use crate::config::PipelineConfig;
use crate::error::CliError;

pub fn run(cfg: &PipelineConfig, seeds: Option<u64>, corrupt: bool) -> Result<Value, CliError> {
    let gc = GradcheckConfig {
        seeds: seeds.unwrap_or(20),
        base_seed: cfg.seed,
        params: cfg.ot,
        corrupt,
        ..GradcheckConfig::default()
    };
    if gc.seeds == 0 {
        return Err(CliError::Usage("--seeds must be >= 1".into()));
    }
    let report = run_gradcheck(&gc)?;
    let passed = report.passed();
    let summary = json!({
        "command": "gradcheck",
        "passed": passed,
        "seeds": gc.seeds,
        "threshold": report.threshold,
        "components": report.components,
        "config": cfg.echo(),
    });
    if passed {
        return Ok(summary);
    }
    let failing: Vec<String> = report
        .components
        .iter()
        .filter(|c| !c.failures.is_empty())
        .map(|c| {
            format!(
                "{}: {} of {} seeds above {:e} (max relative error {:.3e}, first seed {})",
                json!(c.component).as_str().unwrap_or("?"),
                c.failures.len(),
                c.checked,
                report.threshold,
                c.max_rel_error,
                c.failures[0]
            )
        })
        .collect();
    Err(CliError::Verification { message: failing.join("; "), report: summary })
}
