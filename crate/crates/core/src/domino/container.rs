//! On-disk cluster model.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic            8 bytes  "PSDACLM1"
//! manifest_len     u64
//! manifest         manifest_len bytes of UTF-8 JSON
//! payload          f32 array
//! ```
//!
//! The manifest carries scopes, element lists, member lists, expert weights,
//! seeds, k values and the word chain. Cluster centers and word embeddings
//! live in the payload, addressed by `{offset, rows, cols}` in f32 units,
//! row-major. Every map in the manifest is ordered, so identical models
//! serialize to identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stage::{Cluster, Element, StageClusters, StageMeta};
use super::{ChainEntry, ClusterModel, DominoError, KPolicy, WordTable};
use crate::gmm::GmmConfig;

pub const CONTAINER_MAGIC: &[u8; 8] = b"PSDACLM1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ArrayRef {
    offset: usize,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct ClusterEntry {
    members: Vec<usize>,
    expert_weight: f64,
}

#[derive(Serialize, Deserialize)]
struct StageEntry {
    scope_id: String,
    k_requested: usize,
    k_used: usize,
    seed: u64,
    em_iterations: usize,
    converged: bool,
    log_likelihood: f64,
    warnings: Vec<String>,
    elements: Vec<Element>,
    clusters: Vec<ClusterEntry>,
    centers: ArrayRef,
}

#[derive(Serialize, Deserialize)]
struct LanguageEntry {
    lang: String,
    words: Vec<String>,
    embeddings: ArrayRef,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    word_dim: usize,
    pos_dim: usize,
    embed_dim: usize,
    k_policy: KPolicy,
    gmm: GmmConfig,
    provenance: BTreeMap<String, String>,
    warnings: Vec<String>,
    language_family: BTreeMap<String, String>,
    languages: Vec<LanguageEntry>,
    single: Vec<StageEntry>,
    family: Vec<StageEntry>,
    multi: StageEntry,
    /// lang → word → [single, family, multi]
    chain: BTreeMap<String, BTreeMap<String, [usize; 3]>>,
}

#[derive(Default)]
struct Payload(Vec<f32>);

impl Payload {
    fn push(&mut self, rows: &[Vec<f64>], cols: usize) -> ArrayRef {
        let offset = self.0.len();
        for r in rows {
            self.0.extend(r.iter().map(|&x| x as f32));
        }
        ArrayRef { offset, rows: rows.len(), cols }
    }

    fn get(&self, r: &ArrayRef) -> Result<Vec<Vec<f64>>, DominoError> {
        let end = r
            .rows
            .checked_mul(r.cols)
            .and_then(|len| r.offset.checked_add(len))
            .filter(|&end| end <= self.0.len())
            .ok_or_else(|| DominoError::Format("array reference past end of payload".into()))?;
        Ok(self.0[r.offset..end]
            .chunks(r.cols.max(1))
            .take(r.rows)
            .map(|c| c.iter().map(|&x| f64::from(x)).collect())
            .collect())
    }
}

fn stage_entry(s: &StageClusters, dim: usize, payload: &mut Payload) -> StageEntry {
    let centers: Vec<Vec<f64>> = s.clusters.iter().map(|c| c.center.clone()).collect();
    StageEntry {
        scope_id: s.scope_id.clone(),
        k_requested: s.k_requested,
        k_used: s.k_used,
        seed: s.seed,
        em_iterations: s.em_iterations,
        converged: s.converged,
        log_likelihood: s.log_likelihood,
        warnings: s.warnings.clone(),
        elements: s.elements.clone(),
        clusters: s
            .clusters
            .iter()
            .map(|c| ClusterEntry { members: c.members.clone(), expert_weight: c.expert_weight })
            .collect(),
        centers: payload.push(&centers, dim),
    }
}

fn stage_from(e: StageEntry, dim: usize, payload: &Payload) -> Result<StageClusters, DominoError> {
    if e.centers.cols != dim || e.centers.rows != e.clusters.len() {
        return Err(DominoError::Format(format!("`{}`: center array shape mismatch", e.scope_id)));
    }
    let centers = payload.get(&e.centers)?;
    let clusters = e
        .clusters
        .into_iter()
        .zip(centers)
        .map(|(c, center)| Cluster { members: c.members, center, expert_weight: c.expert_weight })
        .collect();
    let meta = StageMeta {
        k_requested: e.k_requested,
        k_used: e.k_used,
        seed: e.seed,
        em_iterations: e.em_iterations,
        converged: e.converged,
        log_likelihood: e.log_likelihood,
        warnings: e.warnings,
    };
    StageClusters::from_parts(e.scope_id, e.elements, clusters, meta)
}

impl ClusterModel {
    /// Serializes to the container format. Centers and embeddings are stored as f32.
    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = self.embed_dim();
        let mut payload = Payload::default();
        let languages = self
            .words
            .iter()
            .map(|(lang, t)| LanguageEntry {
                lang: lang.clone(),
                words: t.words.clone(),
                embeddings: payload.push(&t.embeddings, dim),
            })
            .collect();
        let single = self.single.values().map(|s| stage_entry(s, dim, &mut payload)).collect();
        let family = self.family.values().map(|s| stage_entry(s, dim, &mut payload)).collect();
        let multi = stage_entry(&self.multi, dim, &mut payload);
        let chain = self
            .chain
            .iter()
            .map(|(lang, m)| {
                (lang.clone(), m.iter().map(|(w, c)| (w.clone(), [c.single, c.family, c.multi])).collect())
            })
            .collect();
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            word_dim: self.word_dim,
            pos_dim: self.pos_dim,
            embed_dim: dim,
            k_policy: self.k_policy,
            gmm: self.gmm,
            provenance: self.provenance.clone(),
            warnings: self.warnings.clone(),
            language_family: self.language_family.clone(),
            languages,
            single,
            family,
            multi,
            chain,
        };
        let json = serde_json::to_vec(&manifest).expect("manifest serializes");
        let mut out = Vec::with_capacity(16 + json.len() + 4 * payload.0.len());
        out.extend_from_slice(CONTAINER_MAGIC);
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for x in &payload.0 {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DominoError> {
        let fmt = |m: &str| DominoError::Format(m.to_string());
        if bytes.len() < 16 || &bytes[..8] != CONTAINER_MAGIC {
            return Err(fmt("bad magic"));
        }
        let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let body = &bytes[16..];
        if body.len() < len {
            return Err(fmt("truncated manifest"));
        }
        let manifest: Manifest =
            serde_json::from_slice(&body[..len]).map_err(|e| DominoError::Format(format!("manifest: {e}")))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(DominoError::Format(format!("unsupported format version {}", manifest.format_version)));
        }
        let raw = &body[len..];
        if raw.len() % 4 != 0 {
            return Err(fmt("payload is not a whole number of f32 values"));
        }
        let payload = Payload(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect());
        let dim = manifest.embed_dim;
        if dim != manifest.word_dim + manifest.pos_dim {
            return Err(fmt("embed_dim is not word_dim + pos_dim"));
        }

        let mut words = BTreeMap::new();
        for l in manifest.languages {
            if l.embeddings.cols != dim || l.embeddings.rows != l.words.len() {
                return Err(DominoError::Format(format!("`{}`: embedding array shape mismatch", l.lang)));
            }
            let embeddings = payload.get(&l.embeddings)?;
            words.insert(l.lang, WordTable { words: l.words, embeddings });
        }
        let mut single = BTreeMap::new();
        for e in manifest.single {
            let s = stage_from(e, dim, &payload)?;
            single.insert(s.scope_id.clone(), s);
        }
        let mut family = BTreeMap::new();
        for e in manifest.family {
            let s = stage_from(e, dim, &payload)?;
            family.insert(s.scope_id.clone(), s);
        }
        let multi = stage_from(manifest.multi, dim, &payload)?;
        let chain = manifest
            .chain
            .into_iter()
            .map(|(lang, m)| {
                let m = m
                    .into_iter()
                    .map(|(w, [s, f, mu])| (w, ChainEntry { single: s, family: f, multi: mu }))
                    .collect();
                (lang, m)
            })
            .collect();
        let model = ClusterModel {
            single,
            family,
            multi,
            chain,
            language_family: manifest.language_family,
            words,
            word_dim: manifest.word_dim,
            pos_dim: manifest.pos_dim,
            k_policy: manifest.k_policy,
            gmm: manifest.gmm,
            warnings: manifest.warnings,
            provenance: manifest.provenance,
        };
        model.check_chain()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DominoError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| DominoError::Format(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    /// Every chain entry points at existing clusters of the right scopes.
    pub fn check_chain(&self) -> Result<(), DominoError> {
        for (lang, entries) in &self.chain {
            let single = self.single.get(lang).ok_or_else(|| DominoError::Chain(format!("no stage for `{lang}`")))?;
            let fam_id = self
                .language_family
                .get(lang)
                .ok_or_else(|| DominoError::Chain(format!("no family for `{lang}`")))?;
            let fam = self.family.get(fam_id).ok_or_else(|| DominoError::Chain(format!("no stage for `{fam_id}`")))?;
            for (word, c) in entries {
                if c.single >= single.clusters.len() || c.family >= fam.clusters.len() || c.multi >= self.multi.clusters.len() {
                    return Err(DominoError::Chain(format!("`{lang}/{word}` references a missing cluster")));
                }
            }
        }
        Ok(())
    }
}
