//! Optimal-transport affinity regularization between an original sentence
//! matrix and its augmented counterpart.
//!
//! `loss_reg = ρ₁·loss_ot + ρ₂·loss_eig + ρ₃·loss_dis`, where
//!
//! * `loss_ot = ⟨P, C⟩` with `C` the pairwise token distances and `P` the
//!   entropic Sinkhorn plan between uniform token marginals;
//! * `loss_eig = −η Σ σ²` over the `k` smallest singular values of `augᵀ·orig`;
//! * `loss_dis = 1 − cos` of the mean-pooled sentence vectors.
//!
//! Gradients are with respect to the augmented matrix. The OT gradient holds
//! the plan fixed; the eigen gradient holds the singular vectors fixed.

mod compose;
mod cost;
mod distance;
pub mod gradcheck;
mod procrustes;
mod sinkhorn;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embeddings::SentenceMatrix;

pub use compose::{compose_reg, compose_total, WEIGHT_SUM_TOL};
pub use cost::{cost_matrix, ground_cost, CostMatrix};
pub use distance::{distance_shrinkage_loss, ZERO_NORM};
pub use procrustes::{
    eig_shrinkage, eig_shrinkage_fixed_factors, eig_shrinkage_value, procrustes_map, EigShrinkage, Procrustes,
    DEGENERACY_GAP,
};
pub use sinkhorn::{marginal_error, sinkhorn, uniform_marginal, TransportPlan};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OtError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("marginal `{0}` has zero mass")]
    ZeroMass(String),
    #[error("{0} pooled vector has (near) zero norm")]
    ZeroVector(String),
    #[error("SVD failed: {0}")]
    Svd(String),
    #[error("weight sum: {0}")]
    WeightSum(String),
}

/// `⟨P, C⟩` and its gradient with respect to `aug` under a fixed plan:
/// `∂/∂aug_j = Σ_i P_ij · p·D_ij^(p−1) · (aug_j − orig_i) / D_ij`, zero where `D_ij = 0`.
pub fn ot_loss(
    plan: &TransportPlan,
    cost: &CostMatrix,
    orig: &SentenceMatrix,
    aug: &SentenceMatrix,
) -> Result<(f64, DMatrix<f64>), OtError> {
    let n = cost.size();
    if plan.plan.nrows() != n || plan.plan.ncols() != n || orig.rows() != n || aug.rows() != n || orig.dim() != aug.dim() {
        return Err(OtError::Shape("plan, cost and sentence matrices disagree".into()));
    }
    let p = &plan.plan;
    let c = cost.entries();
    let loss: f64 = p.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
    let (o, a) = (orig.as_matrix(), aug.as_matrix());
    let dist = cost.distances();
    let mut grad = DMatrix::zeros(n, aug.dim());
    for j in 0..n {
        for i in 0..n {
            let dij = dist[(i, j)];
            if dij == 0.0 {
                continue;
            }
            let scale = p[(i, j)] * cost.p() * dij.powf(cost.p() - 1.0) / dij;
            for col in 0..aug.dim() {
                grad[(j, col)] += scale * (a[(j, col)] - o[(i, col)]);
            }
        }
    }
    Ok((loss, grad))
}

/// Regularizer hyperparameters; defaults are the reference experimental settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtParams {
    pub epsilon: f64,
    /// Ground-cost exponent.
    pub p: f64,
    /// Number of smallest singular values penalized.
    pub k: usize,
    pub eta: f64,
    pub rho: [f64; 3],
    pub lambda: [f64; 2],
    pub sinkhorn_max_iter: usize,
    pub sinkhorn_tol: f64,
}

impl Default for OtParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            p: 1.0,
            k: 300,
            eta: 0.001,
            rho: [0.4, 0.2, 0.4],
            lambda: [0.5, 0.5],
            sinkhorn_max_iter: 1000,
            sinkhorn_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub loss_ot: f64,
    pub loss_eig: f64,
    pub loss_dis: f64,
    pub loss_reg: f64,
    /// Task loss supplied by the caller; 0 until [`LossBreakdown::with_task_loss`].
    pub loss_task: f64,
    pub loss_total: f64,
    /// `∂loss_reg/∂aug`
    pub grad_augmented: DMatrix<f64>,
    pub rho: [f64; 3],
    pub lambda: [f64; 2],
    pub sinkhorn_iterations: usize,
    pub marginal_error: f64,
    pub non_convergence: bool,
    pub log_domain: bool,
    /// Singular values actually penalized: `min(k, dim)`.
    pub eig_k: usize,
    pub degenerate_spectrum: bool,
}

impl LossBreakdown {
    pub fn with_task_loss(mut self, loss_task: f64) -> Result<Self, OtError> {
        self.loss_task = loss_task;
        self.loss_total = compose_total(loss_task, self.loss_reg, self.lambda)?;
        Ok(self)
    }
}

/// Runs cost → Sinkhorn (uniform marginals) → OT loss, Procrustes → eigen
/// shrinkage, distance shrinkage, and the weighted composition.
pub fn affinity_regularization(
    orig: &SentenceMatrix,
    aug: &SentenceMatrix,
    params: &OtParams,
) -> Result<LossBreakdown, OtError> {
    let cost = ground_cost(orig, aug, params.p)?;
    let n = cost.size();
    let marg = uniform_marginal(n);
    let plan = sinkhorn(&cost, &marg, &marg, params.epsilon, params.sinkhorn_max_iter, params.sinkhorn_tol)?;
    let (loss_ot, grad_ot) = ot_loss(&plan, &cost, orig, aug)?;

    let proc = procrustes_map(orig, aug)?;
    let eig_k = params.k.min(proc.singular_values.len());
    let eig = eig_shrinkage(&proc, orig, eig_k, params.eta)?;

    let (loss_dis, grad_dis) = distance_shrinkage_loss(orig, aug)?;
    let loss_reg = compose_reg(loss_ot, eig.loss, loss_dis, params.rho)?;
    let loss_total = compose_total(0.0, loss_reg, params.lambda)?;
    let [r1, r2, r3] = params.rho;
    let grad_augmented = grad_ot * r1 + &eig.grad * r2 + grad_dis * r3;

    Ok(LossBreakdown {
        loss_ot,
        loss_eig: eig.loss,
        loss_dis,
        loss_reg,
        loss_task: 0.0,
        loss_total,
        grad_augmented,
        rho: params.rho,
        lambda: params.lambda,
        sinkhorn_iterations: plan.iterations_used,
        marginal_error: plan.marginal_error,
        non_convergence: !plan.converged,
        log_domain: plan.log_domain,
        eig_k,
        degenerate_spectrum: eig.degenerate,
    })
}

#[cfg(test)]
mod tests;
