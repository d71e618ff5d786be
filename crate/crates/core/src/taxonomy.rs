//! Language → family hierarchy.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TaxonomyError {
    #[error("taxonomy line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("taxonomy line {line}: language `{lang}` already belongs to family `{first_family}`")]
    DuplicateLanguage { line: usize, lang: String, first_family: String },
    #[error("taxonomy line {line}: duplicate family `{family}`")]
    DuplicateFamily { line: usize, family: String },
    #[error("taxonomy line {line}: family `{family}` has no languages")]
    EmptyFamily { line: usize, family: String },
    #[error("taxonomy has no families")]
    NoFamilies,
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("reading taxonomy {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub family_id: String,
    pub member_languages: Vec<String>,
}

/// Two-level tree: each language belongs to exactly one family, and all
/// families together form the multi-language pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageTaxonomy {
    families: Vec<FamilyEntry>,
    #[serde(skip)]
    lang_to_family: BTreeMap<String, usize>,
}

impl LanguageTaxonomy {
    /// Builds a taxonomy from `(family, languages)` pairs, validating every invariant.
    pub fn new<F, L, S>(families: F) -> Result<Self, TaxonomyError>
    where
        F: IntoIterator<Item = (S, L)>,
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut b = Builder::default();
        for (i, (fam, langs)) in families.into_iter().enumerate() {
            b.push(i + 1, fam.into(), langs.into_iter().map(Into::into).collect())?;
        }
        b.finish()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TaxonomyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Parses `family_id: lang1,lang2,...` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut b = Builder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((fam, langs)) = line.split_once(':') else {
                return Err(TaxonomyError::Parse {
                    line: line_no,
                    message: format!("expected `family_id: lang1,lang2,...`, got `{line}`"),
                });
            };
            let fam = fam.trim();
            if fam.is_empty() {
                return Err(TaxonomyError::Parse { line: line_no, message: "empty family id".into() });
            }
            let langs: Vec<String> = langs
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            b.push(line_no, fam.to_string(), langs)?;
        }
        b.finish()
    }

    /// Serializes back to the line format accepted by [`LanguageTaxonomy::parse`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for f in &self.families {
            let _ = writeln!(out, "{}: {}", f.family_id, f.member_languages.join(","));
        }
        out
    }

    pub fn families(&self) -> &[FamilyEntry] {
        &self.families
    }

    pub fn language_count(&self) -> usize {
        self.lang_to_family.len()
    }

    pub fn contains(&self, lang: &str) -> bool {
        self.lang_to_family.contains_key(lang)
    }

    pub fn family_of(&self, lang: &str) -> Result<&str, TaxonomyError> {
        self.lang_to_family
            .get(lang)
            .map(|&i| self.families[i].family_id.as_str())
            .ok_or_else(|| TaxonomyError::UnknownLanguage(lang.to_string()))
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.families.iter().flat_map(|f| f.member_languages.iter().map(String::as_str))
    }
}

#[derive(Default)]
struct Builder {
    families: Vec<FamilyEntry>,
    family_ids: HashSet<String>,
    lang_to_family: BTreeMap<String, usize>,
}

impl Builder {
    fn push(&mut self, line: usize, family: String, langs: Vec<String>) -> Result<(), TaxonomyError> {
        if langs.is_empty() {
            return Err(TaxonomyError::EmptyFamily { line, family });
        }
        if !self.family_ids.insert(family.clone()) {
            return Err(TaxonomyError::DuplicateFamily { line, family });
        }
        let idx = self.families.len();
        for lang in &langs {
            if let Some(&prev) = self.lang_to_family.get(lang) {
                let first_family = if prev == idx {
                    family.clone()
                } else {
                    self.families[prev].family_id.clone()
                };
                return Err(TaxonomyError::DuplicateLanguage { line, lang: lang.clone(), first_family });
            }
            self.lang_to_family.insert(lang.clone(), idx);
        }
        self.families.push(FamilyEntry { family_id: family, member_languages: langs });
        Ok(())
    }

    fn finish(self) -> Result<LanguageTaxonomy, TaxonomyError> {
        if self.families.is_empty() {
            return Err(TaxonomyError::NoFamilies);
        }
        Ok(LanguageTaxonomy { families: self.families, lang_to_family: self.lang_to_family })
    }
}
