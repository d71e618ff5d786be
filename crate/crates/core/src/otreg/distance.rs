use nalgebra::{DMatrix, DVector};

use super::cost::check_pair;
use super::OtError;
use crate::embeddings::SentenceMatrix;

pub const ZERO_NORM: f64 = 1e-12;

fn mean_pool(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(m.ncols(), (0..m.ncols()).map(|j| m.column(j).sum() / n))
}

/// `1 − cos(mean(orig), mean(aug))` and its gradient with respect to `aug`.
pub fn distance_shrinkage_loss(
    orig: &SentenceMatrix,
    aug: &SentenceMatrix,
) -> Result<(f64, DMatrix<f64>), OtError> {
    check_pair(orig, aug)?;
    let po = mean_pool(orig.as_matrix());
    let pa = mean_pool(aug.as_matrix());
    let (no, na) = (po.norm(), pa.norm());
    if no < ZERO_NORM {
        return Err(OtError::ZeroVector("original".into()));
    }
    if na < ZERO_NORM {
        return Err(OtError::ZeroVector("augmented".into()));
    }
    let cos = (po.dot(&pa) / (no * na)).clamp(-1.0, 1.0);
    // ½‖û − v̂‖² equals 1 − cos without the cancellation near cos = 1
    let loss = 0.5 * (&po / no - &pa / na).norm_squared();
    // d cos / d pa = po/(|po||pa|) − cos · pa/|pa|²; pooling spreads it as 1/n per row
    let d_pool = -(&po / (no * na) - &pa * (cos / (na * na)));
    let n = aug.rows();
    let row = d_pool.transpose() / n as f64;
    let grad = DMatrix::from_fn(n, aug.dim(), |_, j| row[j]);
    Ok((loss, grad))
}
