//! Domino clustering: per-language GMM over POS-augmented word embeddings,
//! then per-family GMM over expert-weighted language centers, then one GMM
//! over expert-weighted family centers.
//!
//! Expert weights are cluster sizes over the scope's element count. Words are
//! resolved to family and multi-language clusters by predicting their
//! weighted single-language center (and in turn the weighted family center)
//! under the next stage's mixture.

mod container;
mod stage;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::{final_embedding, PosTagging, VocabStore};
use crate::gmm::{GmmConfig, GmmError};
use crate::taxonomy::{LanguageTaxonomy, TaxonomyError};

pub use container::{CONTAINER_MAGIC, FORMAT_VERSION};
pub use stage::{weighted_centers, Cluster, Element, StageClusters};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DominoError {
    #[error(transparent)]
    Gmm(#[from] GmmError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("scope `{0}` has no elements to cluster")]
    EmptyScope(String),
    #[error("dimension mismatch in `{scope}`: expected {expected}, found {found}")]
    DimensionMismatch { scope: String, expected: usize, found: usize },
    #[error("chain resolution failed: {0}")]
    Chain(String),
    #[error("invalid k rule `{0}`; expected `sqrt` or a positive integer")]
    KRule(String),
    #[error("cluster model container: {0}")]
    Format(String),
}

/// Cluster count for a scope of `n` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum KRule {
    /// `ceil(sqrt(n))`
    #[default]
    Sqrt,
    Fixed(usize),
}

impl KRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            KRule::Sqrt => (n as f64).sqrt().ceil() as usize,
            KRule::Fixed(k) => k,
        }
    }
}

impl std::str::FromStr for KRule {
    type Err = DominoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sqrt" => Ok(KRule::Sqrt),
            other => match other.parse::<usize>() {
                Ok(k) if k > 0 => Ok(KRule::Fixed(k)),
                _ => Err(DominoError::KRule(s.to_string())),
            },
        }
    }
}

impl std::fmt::Display for KRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KRule::Sqrt => f.write_str("sqrt"),
            KRule::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl TryFrom<String> for KRule {
    type Error = DominoError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<KRule> for String {
    fn from(k: KRule) -> Self {
        k.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KPolicy {
    pub single: KRule,
    pub family: KRule,
    pub multi: KRule,
}

impl KPolicy {
    pub fn fixed(k: usize) -> Self {
        Self { single: KRule::Fixed(k), family: KRule::Fixed(k), multi: KRule::Fixed(k) }
    }
}

/// Cluster ids of one word at each stage. `family` is local to the word's family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub single: usize,
    pub family: usize,
    pub multi: usize,
}

/// Words of one language with their POS-augmented embeddings, in store order.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTable {
    pub words: Vec<String>,
    pub embeddings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub single: BTreeMap<String, StageClusters>,
    pub family: BTreeMap<String, StageClusters>,
    pub multi: StageClusters,
    /// lang → word → chain
    pub chain: BTreeMap<String, BTreeMap<String, ChainEntry>>,
    /// lang → family id, for the languages that were clustered.
    pub language_family: BTreeMap<String, String>,
    pub words: BTreeMap<String, WordTable>,
    pub word_dim: usize,
    pub pos_dim: usize,
    pub k_policy: KPolicy,
    pub gmm: GmmConfig,
    pub warnings: Vec<String>,
    /// Free-form key/value echo of the configuration that produced the model.
    pub provenance: BTreeMap<String, String>,
}

impl ClusterModel {
    pub fn embed_dim(&self) -> usize {
        self.word_dim + self.pos_dim
    }

    pub fn chain_of(&self, lang: &str, word: &str) -> Option<ChainEntry> {
        self.chain.get(lang).and_then(|m| m.get(word)).copied()
    }

    pub fn stages(&self) -> impl Iterator<Item = &StageClusters> {
        self.single.values().chain(self.family.values()).chain(std::iter::once(&self.multi))
    }

    pub fn word_count(&self) -> usize {
        self.chain.values().map(BTreeMap::len).sum()
    }
}

/// Clusters one language's words; elements are the words in input order.
pub fn cluster_single_language(
    lang: &str,
    words: &[(String, Vec<f64>)],
    k_rule: KRule,
    cfg: &GmmConfig,
) -> Result<StageClusters, DominoError> {
    let elements = words.iter().map(|(w, _)| Element::Word { word: w.clone() }).collect();
    let points: Vec<Vec<f64>> = words.iter().map(|(_, v)| v.clone()).collect();
    stage::cluster_points(lang, elements, points, k_rule, cfg)
}

/// Clusters the expert-weighted centers `α · Cen` of every language in a family.
pub fn cluster_family(
    family: &str,
    per_language: &[&StageClusters],
    k_rule: KRule,
    cfg: &GmmConfig,
) -> Result<StageClusters, DominoError> {
    cluster_weighted_centers(family, per_language, k_rule, cfg)
}

/// Clusters the expert-weighted family centers `β · Cen` across the taxonomy.
/// `per_family` is taken in taxonomy order regardless of argument order.
pub fn cluster_multi(
    tax: &LanguageTaxonomy,
    per_family: &[&StageClusters],
    k_rule: KRule,
    cfg: &GmmConfig,
) -> Result<StageClusters, DominoError> {
    let mut ordered = Vec::with_capacity(per_family.len());
    for f in tax.families() {
        if let Some(s) = per_family.iter().find(|s| s.scope_id == f.family_id) {
            ordered.push(*s);
        }
    }
    if let Some(stray) = per_family.iter().find(|s| !ordered.iter().any(|o| o.scope_id == s.scope_id)) {
        return Err(DominoError::Chain(format!("family `{}` is not in the taxonomy", stray.scope_id)));
    }
    cluster_weighted_centers(MULTI_SCOPE, &ordered, k_rule, cfg)
}

pub const MULTI_SCOPE: &str = "MUL";

fn cluster_weighted_centers(
    scope: &str,
    children: &[&StageClusters],
    k_rule: KRule,
    cfg: &GmmConfig,
) -> Result<StageClusters, DominoError> {
    let mut elements = Vec::new();
    let mut points = Vec::new();
    let dim = children.iter().flat_map(|c| c.clusters.iter()).map(|c| c.center.len()).next();
    for child in children {
        for (t, (cluster, point)) in child.clusters.iter().zip(weighted_centers(child)).enumerate() {
            if Some(cluster.center.len()) != dim {
                return Err(DominoError::DimensionMismatch {
                    scope: scope.to_string(),
                    expected: dim.unwrap_or(0),
                    found: cluster.center.len(),
                });
            }
            elements.push(Element::Cluster { scope: child.scope_id.clone(), cluster: t });
            points.push(point);
        }
    }
    stage::cluster_points(scope, elements, points, k_rule, cfg)
}

/// Runs all three stages and resolves every word's chain.
pub fn build_cluster_model(
    stores: &BTreeMap<String, VocabStore>,
    pos: &PosTagging,
    tax: &LanguageTaxonomy,
    k_policy: KPolicy,
    cfg: &GmmConfig,
) -> Result<ClusterModel, DominoError> {
    let mut word_dim = None;
    for (lang, store) in stores {
        tax.family_of(lang)?;
        if store.is_empty() {
            return Err(DominoError::EmptyScope(lang.clone()));
        }
        match word_dim {
            None => word_dim = Some(store.dim()),
            Some(d) if d != store.dim() => {
                return Err(DominoError::DimensionMismatch { scope: lang.clone(), expected: d, found: store.dim() })
            }
            _ => {}
        }
    }
    let word_dim = word_dim.ok_or_else(|| DominoError::EmptyScope(MULTI_SCOPE.into()))?;
    let projection = pos.projection();

    let tables: BTreeMap<String, WordTable> = stores
        .par_iter()
        .map(|(lang, store)| {
            let embeddings = store
                .iter()
                .map(|(w, v)| final_embedding(v, pos.tag_or_x(lang, w), projection))
                .collect();
            (lang.clone(), WordTable { words: store.words().to_vec(), embeddings })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();

    let single: BTreeMap<String, StageClusters> = tables
        .par_iter()
        .map(|(lang, table)| {
            let words: Vec<(String, Vec<f64>)> =
                table.words.iter().cloned().zip(table.embeddings.iter().cloned()).collect();
            cluster_single_language(lang, &words, k_policy.single, cfg).map(|s| (lang.clone(), s))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .collect();

    let mut language_family = BTreeMap::new();
    for lang in single.keys() {
        language_family.insert(lang.clone(), tax.family_of(lang)?.to_string());
    }
    let family_jobs: Vec<(String, Vec<&StageClusters>)> = tax
        .families()
        .iter()
        .map(|f| {
            let members: Vec<&StageClusters> =
                f.member_languages.iter().filter_map(|l| single.get(l)).collect();
            (f.family_id.clone(), members)
        })
        .filter(|(_, m)| !m.is_empty())
        .collect();
    let family: BTreeMap<String, StageClusters> = family_jobs
        .par_iter()
        .map(|(fam, members)| cluster_family(fam, members, k_policy.family, cfg).map(|s| (fam.clone(), s)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .collect();

    let fam_refs: Vec<&StageClusters> = family.values().collect();
    let multi = cluster_multi(tax, &fam_refs, k_policy.multi, cfg)?;

    let mut chain = BTreeMap::new();
    for (lang, stage) in &single {
        let fam_stage = &family[&language_family[lang]];
        let single_weighted = weighted_centers(stage);
        let family_weighted = weighted_centers(fam_stage);
        let mut entries = BTreeMap::new();
        for (i, el) in stage.elements.iter().enumerate() {
            let Element::Word { word } = el else {
                return Err(DominoError::Chain(format!("non-word element in `{lang}`")));
            };
            let s = stage.cluster_of(i);
            let f = fam_stage.predict(&single_weighted[s])?;
            let m = multi.predict(&family_weighted[f])?;
            entries.insert(word.clone(), ChainEntry { single: s, family: f, multi: m });
        }
        chain.insert(lang.clone(), entries);
    }

    let warnings = single
        .values()
        .chain(family.values())
        .chain(std::iter::once(&multi))
        .flat_map(|s| s.warnings.iter().cloned())
        .collect();

    Ok(ClusterModel {
        single,
        family,
        multi,
        chain,
        language_family,
        words: tables,
        word_dim,
        pos_dim: projection.dim(),
        k_policy,
        gmm: *cfg,
        warnings,
        provenance: BTreeMap::new(),
    })
}
