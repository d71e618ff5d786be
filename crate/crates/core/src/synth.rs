//! Seeded synthetic multilingual vocabularies with known synonym groups.
//!
//! Every group has one shared center; each language adds its own small
//! constant offset, and each word adds isotropic noise. Used by tests,
//! benchmarks and the demo fixtures.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::embeddings::{PosProjection, PosTagging, Upos, VocabStore};
use crate::taxonomy::LanguageTaxonomy;

#[derive(Debug, Clone)]
pub struct SynonymConfig {
    /// `(family, languages)` in taxonomy order.
    pub families: Vec<(String, Vec<String>)>,
    pub groups: usize,
    pub words_per_group: usize,
    pub dim: usize,
    /// Per-coordinate standard deviation of word noise.
    pub noise: f64,
    /// Minimum center separation, in units of `noise`.
    pub min_separation: f64,
    /// Per-coordinate standard deviation of the per-language offset.
    pub language_offset: f64,
    pub pos_dim: usize,
    pub seed: u64,
}

impl SynonymConfig {
    /// Three languages in two families, ten groups, five words per group.
    pub fn three_languages(seed: u64) -> Self {
        Self {
            families: vec![
                ("Germanic".into(), vec!["en".into(), "de".into()]),
                ("Romance".into(), vec!["es".into()]),
            ],
            groups: 10,
            words_per_group: 5,
            dim: 16,
            noise: 0.05,
            min_separation: 10.0,
            language_offset: 0.05,
            pos_dim: 17,
            seed,
        }
    }

    pub fn two_languages(seed: u64) -> Self {
        Self {
            families: vec![("Germanic".into(), vec!["en".into(), "de".into()])],
            ..Self::three_languages(seed)
        }
    }

    pub fn languages(&self) -> impl Iterator<Item = &String> {
        self.families.iter().flat_map(|(_, l)| l.iter())
    }
}

#[derive(Debug, Clone)]
pub struct SynonymData {
    pub stores: BTreeMap<String, VocabStore>,
    pub taxonomy: LanguageTaxonomy,
    pub tagging: PosTagging,
    /// lang → word → group
    pub labels: BTreeMap<String, BTreeMap<String, usize>>,
    pub centers: Vec<Vec<f64>>,
}

impl SynonymData {
    pub fn label(&self, lang: &str, word: &str) -> Option<usize> {
        self.labels.get(lang).and_then(|m| m.get(word)).copied()
    }

    /// Word `i` of `group` in `lang`.
    pub fn word(lang: &str, group: usize, i: usize) -> String {
        format!("{lang}_g{group}_w{i}")
    }

    /// Groups alternate NOUN / VERB.
    pub fn group_tag(group: usize) -> Upos {
        if group % 2 == 0 {
            Upos::Noun
        } else {
            Upos::Verb
        }
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, dim: usize, sd: f64) -> Vec<f64> {
    (0..dim).map(|_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn synonym_data(cfg: &SynonymConfig) -> SynonymData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let min_gap = cfg.min_separation * cfg.noise;
    // centers spread well beyond the required gap; rejection keeps the guarantee
    let spread = Normal::new(0.0, 1.0).expect("valid normal");
    let centers = loop {
        let c: Vec<Vec<f64>> = (0..cfg.groups)
            .map(|_| (0..cfg.dim).map(|_| spread.sample(&mut rng)).collect())
            .collect();
        let ok = (0..c.len()).all(|i| (0..i).all(|j| dist(&c[i], &c[j]) >= min_gap));
        if ok {
            break c;
        }
    };

    let taxonomy = LanguageTaxonomy::new(cfg.families.iter().map(|(f, l)| (f.clone(), l.clone())))
        .expect("synthetic taxonomy is valid");
    let projection = PosProjection::seeded(cfg.pos_dim, rng.random()).expect("valid projection");
    let mut tagging = PosTagging::new(projection);
    let mut stores = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for lang in cfg.languages() {
        let offset = normal_vec(&mut rng, cfg.dim, cfg.language_offset);
        let mut entries = Vec::new();
        let mut lang_labels = BTreeMap::new();
        for (g, center) in centers.iter().enumerate() {
            for i in 0..cfg.words_per_group {
                let noise = normal_vec(&mut rng, cfg.dim, cfg.noise);
                let v: Vec<f64> = center.iter().zip(&offset).zip(&noise).map(|((c, o), n)| c + o + n).collect();
                let w = SynonymData::word(lang, g, i);
                tagging.insert(lang, &w, SynonymData::group_tag(g));
                lang_labels.insert(w.clone(), g);
                entries.push((w, v));
            }
        }
        stores.insert(lang.clone(), VocabStore::from_entries(lang.clone(), cfg.dim, entries).expect("valid store"));
        labels.insert(lang.clone(), lang_labels);
    }
    SynonymData { stores, taxonomy, tagging, labels, centers }
}

/// CoNLL-U text for `count` sentences per language: `subject verb object .`
/// with the subject and object drawn from NOUN groups and the verb from a
/// VERB group. The final `.` is not in any vocabulary.
pub fn synonym_conllu(cfg: &SynonymConfig, lang: &str, count: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nouns: Vec<usize> = (0..cfg.groups).filter(|g| SynonymData::group_tag(*g) == Upos::Noun).collect();
    let verbs: Vec<usize> = (0..cfg.groups).filter(|g| SynonymData::group_tag(*g) == Upos::Verb).collect();
    let mut pick = |groups: &[usize]| {
        let g = groups[rng.random_range(0..groups.len())];
        SynonymData::word(lang, g, rng.random_range(0..cfg.words_per_group))
    };
    let mut out = String::new();
    for s in 0..count {
        let subj = pick(&nouns);
        let verb = if verbs.is_empty() { pick(&nouns) } else { pick(&verbs) };
        let obj = pick(&nouns);
        let _ = writeln!(out, "# sent_id = {lang}-{}", s + 1);
        let _ = writeln!(out, "1\t{subj}\t{subj}\tNOUN\t_\t_\t2\tnsubj\t_\t_");
        let _ = writeln!(out, "2\t{verb}\t{verb}\tVERB\t_\t_\t0\troot\t_\t_");
        let _ = writeln!(out, "3\t{obj}\t{obj}\tNOUN\t_\t_\t2\tobj\t_\t_");
        let _ = writeln!(out, "4\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_");
        out.push('\n');
    }
    out
}

/// Fraction of words whose multi-language cluster's majority label matches their own label.
pub fn multi_cluster_purity(
    chain: impl IntoIterator<Item = (usize, usize)>,
) -> f64 {
    let mut by_cluster: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut total = 0usize;
    for (cluster, label) in chain {
        *by_cluster.entry(cluster).or_default().entry(label).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return 1.0;
    }
    let majority: usize = by_cluster.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    majority as f64 / total as f64
}
