//! Cross-lingual pseudo-semantic data augmentation over static word embeddings.
//!
//! The pipeline has three parts:
//!
//! * [`domino`]: three chained GMM clustering stages (per language, per
//!   language family, across all families) with expert-weighted centers.
//! * [`augment`]: replacement of subject/verb/object token embeddings with
//!   same-cluster candidates from other languages.
//! * [`otreg`]: an optimal-transport affinity regularizer between an original
//!   and an augmented sentence matrix, with analytic gradients.
//!
//! Inputs arrive precomputed: word vectors in word2vec text format, a
//! language-family taxonomy file, and CoNLL-U parsed corpora.

pub mod augment;
pub mod domino;
pub mod embeddings;
pub mod gmm;
pub mod otreg;
pub mod seed;
pub mod synth;
pub mod taxonomy;

pub use augment::{
    augment_sentence, build_candidate_index, AugmentedSentence, CandidateIndex, Replacement,
    Role, SkipReason, SkippedRole,
};
pub use domino::{
    build_cluster_model, cluster_family, cluster_multi, cluster_single_language, ChainEntry,
    ClusterModel, Element, KPolicy, KRule, StageClusters,
};
pub use embeddings::{
    assemble_sentence, final_embedding, pos_one_hot, read_conllu, OovPolicy, PosProjection,
    PosTagging, SentenceMatrix, SentenceRecord, Svo, Upos, VocabStore,
};
pub use gmm::{gmm_fit, gmm_predict, CovarianceKind, GmmConfig, GmmModel};
pub use otreg::{affinity_regularization, LossBreakdown, OtParams};
pub use taxonomy::LanguageTaxonomy;

/// Crate-level error: any module error.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Taxonomy(#[from] taxonomy::TaxonomyError),
    #[error(transparent)]
    Embedding(#[from] embeddings::EmbeddingError),
    #[error(transparent)]
    Gmm(#[from] gmm::GmmError),
    #[error(transparent)]
    Domino(#[from] domino::DominoError),
    #[error(transparent)]
    Augment(#[from] augment::AugmentError),
    #[error(transparent)]
    Ot(#[from] otreg::OtError),
}

pub type Result<T> = std::result::Result<T, Error>;
