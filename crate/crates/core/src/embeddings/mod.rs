//! Word-vector stores, POS augmentation, CoNLL-U ingestion and sentence matrices.

mod conllu;
mod pos;
mod sentence;
mod vocab;

pub use conllu::{parse_conllu, parse_conllu_lenient, read_conllu, SentenceRecord, Svo};
pub use pos::{final_embedding, pos_one_hot, PosProjection, PosTagging, Upos, UPOS_COUNT};
pub use sentence::{assemble_sentence, OovPolicy, SentenceMatrix};
pub use vocab::VocabStore;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EmbeddingError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: malformed header: {message}")]
    Header { line: usize, message: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: non-finite value for `{word}`")]
    NonFinite { line: usize, word: String },
    #[error("line {line}: duplicate word `{word}`")]
    DuplicateWord { line: usize, word: String },
    #[error("header declares {declared} vectors, file contains {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("line {line}: {message}")]
    Conllu { line: usize, message: String },
    #[error("unknown UPOS tag `{0}`")]
    UnknownUpos(String),
    #[error("out-of-vocabulary word `{0}`")]
    OovWord(String),
    #[error("language mismatch: sentence is `{sentence}`, store is `{store}`")]
    LanguageMismatch { sentence: String, store: String },
    #[error("invalid POS projection: {0}")]
    Projection(String),
    #[error("invalid sentence: {0}")]
    Sentence(String),
}
