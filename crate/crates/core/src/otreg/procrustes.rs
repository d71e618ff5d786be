use nalgebra::{DMatrix, DVector};

use super::cost::check_pair;
use super::OtError;
use crate::embeddings::SentenceMatrix;

/// Orthogonal map `W = U Vᵀ` from the SVD `augᵀ·orig = U Σ Vᵀ`, so that
/// `aug · W ≈ orig`. Singular values are sorted descending; columns of `u`
/// and `v` follow the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Procrustes {
    pub w: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// `min(tokens, dim)`: singular values past this index are identically zero.
    pub rank_bound: usize,
}

pub fn procrustes_map(orig: &SentenceMatrix, aug: &SentenceMatrix) -> Result<Procrustes, OtError> {
    check_pair(orig, aug)?;
    let m = aug.as_matrix().tr_mul(orig.as_matrix());
    if m.iter().any(|x| !x.is_finite()) {
        return Err(OtError::NonFinite("cross-covariance".into()));
    }
    let svd = m.svd(true, true);
    let u_raw = svd.u.ok_or_else(|| OtError::Svd("U not computed".into()))?;
    let vt_raw = svd.v_t.ok_or_else(|| OtError::Svd("Vᵀ not computed".into()))?;
    let sv = svd.singular_values;
    let d = sv.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let singular_values = DVector::from_iterator(d, order.iter().map(|&i| sv[i]));
    let u = DMatrix::from_fn(u_raw.nrows(), d, |r, c| u_raw[(r, order[c])]);
    let v = DMatrix::from_fn(vt_raw.ncols(), d, |r, c| vt_raw[(order[c], r)]);
    let w = &u * v.transpose();
    Ok(Procrustes { w, singular_values, u, v, rank_bound: orig.rows().min(orig.dim()) })
}

/// `−η Σ σ²` over the `k` smallest singular values.
pub fn eig_shrinkage_value(singular_values: &[f64], k: usize, eta: f64) -> Result<f64, OtError> {
    if k > singular_values.len() {
        return Err(OtError::InvalidParameter(format!(
            "k={k} exceeds the {} available singular values",
            singular_values.len()
        )));
    }
    if !(eta > 0.0) {
        return Err(OtError::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let mut sorted = singular_values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(-eta * sorted[..k].iter().map(|s| s * s).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigShrinkage {
    pub loss: f64,
    /// `∂loss/∂aug`, tokens × dim.
    pub grad: DMatrix<f64>,
    /// Set when the penalized part of the spectrum is too close to
    /// degenerate for the gradient to be trusted.
    pub degenerate: bool,
}

pub const DEGENERACY_GAP: f64 = 1e-8;

/// Eigenvector shrinkage loss and its gradient with respect to `aug`,
/// holding the singular vectors fixed: `∂σ_r/∂aug = (orig v_r) u_rᵀ`.
///
/// Degeneracy is judged on the singular values that can vary (index below
/// `rank_bound`): any two penalized ones closer than [`DEGENERACY_GAP`], or
/// the smallest penalized one closer than that to the largest unpenalized one.
pub fn eig_shrinkage(
    proc: &Procrustes,
    orig: &SentenceMatrix,
    k: usize,
    eta: f64,
) -> Result<EigShrinkage, OtError> {
    let sv = proc.singular_values.as_slice();
    let loss = eig_shrinkage_value(sv, k, eta)?;
    let d = sv.len();
    let first = d - k;
    let o = orig.as_matrix();
    let mut grad = DMatrix::zeros(o.nrows(), o.ncols());
    for r in first..d {
        let ov = o * proc.v.column(r);
        grad += (-2.0 * eta * sv[r]) * ov * proc.u.column(r).transpose();
    }
    let free = proc.rank_bound.min(d);
    let mut degenerate = false;
    for r in first..free {
        if r + 1 < free && (sv[r] - sv[r + 1]).abs() < DEGENERACY_GAP {
            degenerate = true;
        }
    }
    if first > 0 && first < free && (sv[first - 1] - sv[first]).abs() < DEGENERACY_GAP {
        degenerate = true;
    }
    Ok(EigShrinkage { loss, grad, degenerate })
}

/// Eigenvector shrinkage loss with the singular vectors frozen at `proc`:
/// `−η Σ (u_rᵀ augᵀ orig v_r)²` over the penalized indices.
pub fn eig_shrinkage_fixed_factors(
    proc: &Procrustes,
    orig: &SentenceMatrix,
    aug: &DMatrix<f64>,
    k: usize,
    eta: f64,
) -> f64 {
    let d = proc.singular_values.len();
    let m = aug.tr_mul(orig.as_matrix());
    (d - k..d)
        .map(|r| {
            let s = proc.u.column(r).dot(&(&m * proc.v.column(r)));
            s * s
        })
        .sum::<f64>()
        * -eta
}
