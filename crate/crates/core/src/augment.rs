//! Pseudo-semantic replacement of subject, verb and object embeddings.
//!
//! Each present SVO role whose word has a cluster chain is overwritten with
//! the raw embedding of a candidate drawn uniformly from the same
//! multi-language cluster, restricted to languages other than the
//! sentence's. Roles without a chain or without foreign candidates are left
//! untouched and reported.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domino::ClusterModel;
use crate::embeddings::{EmbeddingError, SentenceMatrix, SentenceRecord, VocabStore};
use crate::seed::sentence_seed;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AugmentError {
    #[error("word `{word}` ({lang}) has no cluster chain")]
    MissingChain { lang: String, word: String },
    #[error("sentence `{id}`: matrix has {rows} rows for {tokens} tokens")]
    ShapeMismatch { id: String, rows: usize, tokens: usize },
    #[error("candidate `{word}` ({lang}) has dimension {found}, sentence has {expected}")]
    DimensionMismatch { lang: String, word: String, expected: usize, found: usize },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lang: String,
    pub word: String,
    pub embedding: Vec<f64>,
}

/// Candidate pool per multi-language cluster id, ordered by language then store order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateIndex {
    pub by_multi_cluster: BTreeMap<usize, Vec<Candidate>>,
}

impl CandidateIndex {
    pub fn pool(&self, multi_cluster: usize) -> &[Candidate] {
        self.by_multi_cluster.get(&multi_cluster).map_or(&[], Vec::as_slice)
    }

    /// Pool members whose language differs from `exclude_lang`.
    pub fn eligible(&self, multi_cluster: usize, exclude_lang: &str) -> Vec<&Candidate> {
        self.pool(multi_cluster).iter().filter(|c| c.lang != exclude_lang).collect()
    }

    pub fn len(&self) -> usize {
        self.by_multi_cluster.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Groups every stored word by its multi-language cluster, keeping the raw vector.
pub fn build_candidate_index(
    model: &ClusterModel,
    stores: &BTreeMap<String, VocabStore>,
) -> Result<CandidateIndex, AugmentError> {
    let mut index = CandidateIndex::default();
    for (lang, store) in stores {
        for (word, v) in store.iter() {
            let chain = model.chain_of(lang, word).ok_or_else(|| AugmentError::MissingChain {
                lang: lang.clone(),
                word: word.to_string(),
            })?;
            index.by_multi_cluster.entry(chain.multi).or_default().push(Candidate {
                lang: lang.clone(),
                word: word.to_string(),
                embedding: v.to_vec(),
            });
        }
    }
    Ok(index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Verb,
    Object,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Subject, Role::Verb, Role::Object];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub position: usize,
    pub role: Role,
    pub source_word: String,
    pub candidate_lang: String,
    pub candidate_word: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// The parse has no token for this role.
    Absent,
    /// The token has no cluster chain (out of the clustered vocabulary).
    NoChain,
    /// The token's multi-language cluster holds no other-language word.
    EmptyPool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRole {
    pub role: Role,
    pub position: Option<usize>,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSentence {
    pub original: SentenceMatrix,
    pub augmented: SentenceMatrix,
    pub replacements: Vec<Replacement>,
    pub skipped: Vec<SkippedRole>,
}

pub fn augment_sentence(
    rec: &SentenceRecord,
    mat: &SentenceMatrix,
    model: &ClusterModel,
    index: &CandidateIndex,
    seed: u64,
) -> Result<AugmentedSentence, AugmentError> {
    if mat.rows() != rec.len() {
        return Err(AugmentError::ShapeMismatch { id: rec.id.clone(), rows: mat.rows(), tokens: rec.len() });
    }
    rec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut augmented = mat.clone();
    let mut replacements = Vec::new();
    let mut skipped = Vec::new();
    let roles = [rec.svo.subject, rec.svo.verb, rec.svo.object];
    for (role, pos) in Role::ALL.into_iter().zip(roles) {
        let Some(pos) = pos else {
            skipped.push(SkippedRole { role, position: None, reason: SkipReason::Absent });
            continue;
        };
        let word = &rec.tokens[pos];
        let Some(chain) = model.chain_of(&rec.lang, word) else {
            skipped.push(SkippedRole { role, position: Some(pos), reason: SkipReason::NoChain });
            continue;
        };
        let pool = index.eligible(chain.multi, &rec.lang);
        if pool.is_empty() {
            skipped.push(SkippedRole { role, position: Some(pos), reason: SkipReason::EmptyPool });
            continue;
        }
        let cand = pool[rng.random_range(0..pool.len())];
        if cand.embedding.len() != mat.dim() {
            return Err(AugmentError::DimensionMismatch {
                lang: cand.lang.clone(),
                word: cand.word.clone(),
                expected: mat.dim(),
                found: cand.embedding.len(),
            });
        }
        augmented.set_row(pos, &cand.embedding);
        replacements.push(Replacement {
            position: pos,
            role,
            source_word: word.clone(),
            candidate_lang: cand.lang.clone(),
            candidate_word: cand.word.clone(),
        });
    }
    Ok(AugmentedSentence { original: mat.clone(), augmented, replacements, skipped })
}

/// `copies` independent augmentations; copy `c` uses
/// [`sentence_seed`]`(base_seed, rec.id, c)`, so output does not depend on
/// corpus order.
pub fn augment_copies(
    rec: &SentenceRecord,
    mat: &SentenceMatrix,
    model: &ClusterModel,
    index: &CandidateIndex,
    base_seed: u64,
    copies: u32,
) -> Result<Vec<AugmentedSentence>, AugmentError> {
    (0..copies)
        .map(|c| augment_sentence(rec, mat, model, index, sentence_seed(base_seed, &rec.id, c)))
        .collect()
}
