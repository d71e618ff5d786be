use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, SentenceRecord, VocabStore};

/// What to do with a token that has no vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OovPolicy {
    #[default]
    Zero,
    Error,
}

/// Token-by-dimension matrix of a sentence, one row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceMatrix(DMatrix<f64>);

impl SentenceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self, EmbeddingError> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::Sentence("non-finite entry in sentence matrix".into()));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>], dim: usize) -> Result<Self, EmbeddingError> {
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(EmbeddingError::Sentence(format!(
                "row {bad} has {} components, expected {dim}",
                rows[bad].len()
            )));
        }
        Self::new(DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn set_row(&mut self, i: usize, values: &[f64]) {
        for (j, v) in values.iter().enumerate() {
            self.0[(i, j)] = *v;
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i)).collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// True when row `i` is bit-identical in both matrices.
    pub fn row_bits_eq(&self, other: &Self, i: usize) -> bool {
        self.0.row(i).iter().zip(other.0.row(i).iter()).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Stacks the vocabulary vector of every token.
pub fn assemble_sentence(
    rec: &SentenceRecord,
    store: &VocabStore,
    oov: OovPolicy,
) -> Result<SentenceMatrix, EmbeddingError> {
    if rec.lang != store.lang() {
        return Err(EmbeddingError::LanguageMismatch {
            sentence: rec.lang.clone(),
            store: store.lang().to_string(),
        });
    }
    let dim = store.dim();
    let mut m = DMatrix::zeros(rec.len(), dim);
    for (i, tok) in rec.tokens.iter().enumerate() {
        match store.get(tok) {
            Some(v) => {
                for (j, x) in v.iter().enumerate() {
                    m[(i, j)] = *x;
                }
            }
            None if oov == OovPolicy::Zero => {}
            None => return Err(EmbeddingError::OovWord(tok.clone())),
        }
    }
    Ok(SentenceMatrix(m))
}
