use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, SentenceRecord};

pub const UPOS_COUNT: usize = 17;

/// Universal Dependencies part-of-speech categories, in the fixed
/// alphabetical order that defines one-hot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Upos {
    pub const ALL: [Upos; UPOS_COUNT] = [
        Upos::Adj,
        Upos::Adp,
        Upos::Adv,
        Upos::Aux,
        Upos::Cconj,
        Upos::Det,
        Upos::Intj,
        Upos::Noun,
        Upos::Num,
        Upos::Part,
        Upos::Pron,
        Upos::Propn,
        Upos::Punct,
        Upos::Sconj,
        Upos::Sym,
        Upos::Verb,
        Upos::X,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
        }
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Upos {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Upos::ALL
            .iter()
            .copied()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| EmbeddingError::UnknownUpos(s.to_string()))
    }
}

pub fn pos_one_hot(tag: Upos) -> [f64; UPOS_COUNT] {
    let mut v = [0.0; UPOS_COUNT];
    v[tag.index()] = 1.0;
    v
}

/// Affine map from the 17-dim one-hot tag to a `p`-dim block:
/// `weights · one_hot + bias`, weights stored row-major `p × 17`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosProjection {
    dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl PosProjection {
    pub fn new(weights: Vec<f64>, bias: Vec<f64>) -> Result<Self, EmbeddingError> {
        let dim = bias.len();
        if dim == 0 {
            return Err(EmbeddingError::Projection("projection dimension must be positive".into()));
        }
        if weights.len() != dim * UPOS_COUNT {
            return Err(EmbeddingError::Projection(format!(
                "weights hold {} values, expected {dim}x{UPOS_COUNT}",
                weights.len()
            )));
        }
        if weights.iter().chain(&bias).any(|x| !x.is_finite()) {
            return Err(EmbeddingError::Projection("non-finite parameter".into()));
        }
        Ok(Self { dim, weights, bias })
    }

    /// Frozen uniform(-0.1, 0.1) draw for weights and bias.
    pub fn seeded(dim: usize, seed: u64) -> Result<Self, EmbeddingError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..dim * UPOS_COUNT).map(|_| rng.random_range(-0.1..0.1)).collect();
        let bias = (0..dim).map(|_| rng.random_range(-0.1..0.1)).collect();
        Self::new(weights, bias)
    }

    pub fn identity() -> Self {
        let mut weights = vec![0.0; UPOS_COUNT * UPOS_COUNT];
        for i in 0..UPOS_COUNT {
            weights[i * UPOS_COUNT + i] = 1.0;
        }
        Self { dim: UPOS_COUNT, weights, bias: vec![0.0; UPOS_COUNT] }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, weights: vec![0.0; dim * UPOS_COUNT], bias: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn project(&self, tag: Upos) -> Vec<f64> {
        let hot = pos_one_hot(tag);
        (0..self.dim)
            .map(|r| {
                let row = &self.weights[r * UPOS_COUNT..(r + 1) * UPOS_COUNT];
                row.iter().zip(&hot).map(|(w, h)| w * h).sum::<f64>() + self.bias[r]
            })
            .collect()
    }
}

/// `[word_vec || weights · one_hot(tag) + bias]`.
pub fn final_embedding(word_vec: &[f64], tag: Upos, projection: &PosProjection) -> Vec<f64> {
    let mut out = Vec::with_capacity(word_vec.len() + projection.dim());
    out.extend_from_slice(word_vec);
    out.extend(projection.project(tag));
    out
}

/// Per-language word tags plus the frozen tag projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PosTagging {
    tags: BTreeMap<String, HashMap<String, Upos>>,
    projection: PosProjection,
}

impl PosTagging {
    pub fn new(projection: PosProjection) -> Self {
        Self { tags: BTreeMap::new(), projection }
    }

    pub fn insert(&mut self, lang: &str, word: &str, tag: Upos) {
        self.tags.entry(lang.to_string()).or_default().insert(word.to_string(), tag);
    }

    /// Majority tag per `(lang, form)` over a parsed corpus; ties go to the
    /// lower UPOS index. Untagged (`_`) tokens are ignored.
    pub fn from_corpus<'a>(
        projection: PosProjection,
        records: impl IntoIterator<Item = &'a SentenceRecord>,
    ) -> Self {
        let mut counts: BTreeMap<(String, String), [u32; UPOS_COUNT]> = BTreeMap::new();
        for rec in records {
            for (tok, tag) in rec.tokens.iter().zip(&rec.upos) {
                if let Some(tag) = tag {
                    counts.entry((rec.lang.clone(), tok.clone())).or_insert([0; UPOS_COUNT])[tag.index()] += 1;
                }
            }
        }
        let mut out = Self::new(projection);
        for ((lang, word), c) in counts {
            let mut best = 0;
            for i in 1..UPOS_COUNT {
                if c[i] > c[best] {
                    best = i;
                }
            }
            out.insert(&lang, &word, Upos::ALL[best]);
        }
        out
    }

    pub fn tag(&self, lang: &str, word: &str) -> Option<Upos> {
        self.tags.get(lang).and_then(|m| m.get(word)).copied()
    }

    /// Tag for clustering; untagged words fall back to `X`.
    pub fn tag_or_x(&self, lang: &str, word: &str) -> Upos {
        self.tag(lang, word).unwrap_or(Upos::X)
    }

    pub fn projection(&self) -> &PosProjection {
        &self.projection
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabetical_indices() {
        let names: Vec<_> = Upos::ALL.iter().map(|u| u.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(Upos::Verb.index(), 15);
        assert_eq!(Upos::Noun.index(), 7);
        for (i, u) in Upos::ALL.iter().enumerate() {
            assert_eq!(u.index(), i);
            assert_eq!(u.as_str().parse::<Upos>().unwrap(), *u);
        }
        assert!("VB".parse::<Upos>().is_err());
    }

    #[test]
    fn one_hot_is_unit_and_orthogonal() {
        let verb = pos_one_hot(Upos::Verb);
        let noun = pos_one_hot(Upos::Noun);
        assert_eq!(verb[Upos::Verb.index()], 1.0);
        assert_eq!(verb.iter().sum::<f64>(), 1.0);
        assert_eq!(verb.iter().zip(&noun).map(|(a, b)| a * b).sum::<f64>(), 0.0);
        for u in Upos::ALL {
            assert_eq!(pos_one_hot(u).iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn zero_projection_appends_zeros() {
        let v = [0.3, -1.5, 2.0];
        let out = final_embedding(&v, Upos::Noun, &PosProjection::zeros(5));
        assert_eq!(out, vec![0.3, -1.5, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_projection_appends_one_hot() {
        let v = [1.0, 2.0];
        let out = final_embedding(&v, Upos::Verb, &PosProjection::identity());
        assert_eq!(&out[..2], &v);
        assert_eq!(&out[2..], &pos_one_hot(Upos::Verb));
    }

    #[test]
    fn seeded_projection_matches_dense_matvec() {
        let proj = PosProjection::seeded(9, 1234).unwrap();
        assert!(proj.weights().iter().chain(proj.bias()).all(|x| (-0.1..0.1).contains(x)));
        let v: Vec<f64> = (0..6).map(|i| i as f64 * 0.37 - 1.0).collect();
        for tag in Upos::ALL {
            let out = final_embedding(&v, tag, &proj);
            assert_eq!(&out[..6], v.as_slice());
            let hot = pos_one_hot(tag);
            for r in 0..9 {
                let mut acc = proj.bias()[r];
                for c in 0..UPOS_COUNT {
                    acc += proj.weights()[r * UPOS_COUNT + c] * hot[c];
                }
                assert!((out[6 + r] - acc).abs() <= 1e-12);
            }
        }
        assert_eq!(proj, PosProjection::seeded(9, 1234).unwrap());
    }

    #[test]
    fn bad_projection_shapes() {
        assert!(PosProjection::new(vec![0.0; 16], vec![0.0]).is_err());
        assert!(PosProjection::new(vec![], vec![]).is_err());
    }
}
