use super::OtError;

pub const WEIGHT_SUM_TOL: f64 = 1e-9;

fn check_weights(w: &[f64], name: &str) -> Result<(), OtError> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(OtError::WeightSum(format!("{name} weights must be finite and nonnegative: {w:?}")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(OtError::WeightSum(format!("{name} weights sum to {s}, expected 1")));
    }
    Ok(())
}

/// `ρ₁·ot + ρ₂·eig + ρ₃·dis`
pub fn compose_reg(loss_ot: f64, loss_eig: f64, loss_dis: f64, rho: [f64; 3]) -> Result<f64, OtError> {
    check_weights(&rho, "rho")?;
    Ok(rho[0] * loss_ot + rho[1] * loss_eig + rho[2] * loss_dis)
}

/// `λ₁·task + λ₂·reg`
pub fn compose_total(loss_task: f64, loss_reg: f64, lambda: [f64; 2]) -> Result<f64, OtError> {
    check_weights(&lambda, "lambda")?;
    Ok(lambda[0] * loss_task + lambda[1] * loss_reg)
}
