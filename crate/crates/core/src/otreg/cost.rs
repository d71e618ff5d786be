use nalgebra::DMatrix;

use super::OtError;
use crate::embeddings::SentenceMatrix;

/// Pairwise token ground cost `C[i][j] = ‖orig_i − aug_j‖₂^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: DMatrix<f64>,
    distances: DMatrix<f64>,
    p: f64,
}

impl CostMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Unpowered Euclidean distances.
    pub fn distances(&self) -> &DMatrix<f64> {
        &self.distances
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Wraps an explicit cost table (used for synthetic transport problems).
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self, OtError> {
        if !entries.is_square() {
            return Err(OtError::Shape(format!("cost must be square, got {}x{}", entries.nrows(), entries.ncols())));
        }
        if entries.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(OtError::NonFinite("cost entries must be finite and nonnegative".into()));
        }
        Ok(Self { distances: entries.clone(), entries, p: 1.0 })
    }
}

pub(crate) fn check_pair(orig: &SentenceMatrix, aug: &SentenceMatrix) -> Result<(), OtError> {
    if orig.rows() != aug.rows() || orig.dim() != aug.dim() {
        return Err(OtError::Shape(format!(
            "original is {}x{}, augmented is {}x{}",
            orig.rows(),
            orig.dim(),
            aug.rows(),
            aug.dim()
        )));
    }
    if orig.rows() == 0 || orig.dim() == 0 {
        return Err(OtError::Shape("empty sentence matrix".into()));
    }
    Ok(())
}

pub fn cost_matrix(orig: &SentenceMatrix, aug: &SentenceMatrix) -> Result<CostMatrix, OtError> {
    ground_cost(orig, aug, 1.0)
}

pub fn ground_cost(orig: &SentenceMatrix, aug: &SentenceMatrix, p: f64) -> Result<CostMatrix, OtError> {
    check_pair(orig, aug)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(OtError::InvalidParameter(format!("ground cost exponent must be >= 1, got {p}")));
    }
    let (o, a) = (orig.as_matrix(), aug.as_matrix());
    let n = o.nrows();
    let distances = DMatrix::from_fn(n, n, |i, j| (o.row(i) - a.row(j)).norm());
    if distances.iter().any(|d| !d.is_finite()) {
        return Err(OtError::NonFinite("cost overflow".into()));
    }
    let entries = if p == 1.0 { distances.clone() } else { distances.map(|d| d.powf(p)) };
    Ok(CostMatrix { entries, distances, p })
}
