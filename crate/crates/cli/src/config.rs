//! Key-value pipeline configuration.
//!
//! One `key = value` per line, `#` starts a comment. Relative paths are
//! resolved against the directory holding the file. Later assignments win,
//! and command-line overrides are applied after the file.
//!
//! | key | value |
//! |-----|-------|
//! | `taxonomy` | path to `family: lang, lang` lines |
//! | `embeddings.<lang>` | word2vec text file |
//! | `corpus.<lang>` | CoNLL-U file |
//! | `output_dir` | where artifacts go |
//! | `k.single`, `k.family`, `k.multi` | `sqrt` or a positive integer |
//! | `gmm.covariance` | `diagonal` or `spherical` |
//! | `gmm.max_iter`, `gmm.tol`, `gmm.cov_floor` | EM controls |
//! | `pos.dim` | POS projection width |
//! | `ot.epsilon`, `ot.p`, `ot.k`, `ot.eta` | regularizer settings |
//! | `ot.rho`, `ot.lambda` | comma-separated weights |
//! | `sinkhorn.max_iter`, `sinkhorn.tol` | Sinkhorn controls |
//! | `seed`, `copies`, `threads` | integers |
//! | `oov_policy` | `zero` or `error` |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use psda_core::otreg::{compose_reg, compose_total};
use psda_core::{CovarianceKind, GmmConfig, KPolicy, KRule, OovPolicy, OtParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub taxonomy: Option<PathBuf>,
    pub embeddings: BTreeMap<String, PathBuf>,
    pub corpus: BTreeMap<String, PathBuf>,
    pub output_dir: PathBuf,
    pub k_policy: KPolicy,
    pub gmm: GmmConfig,
    pub pos_dim: usize,
    pub ot: OtParams,
    pub seed: u64,
    pub oov_policy: OovPolicy,
    pub copies: u32,
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            taxonomy: None,
            embeddings: BTreeMap::new(),
            corpus: BTreeMap::new(),
            output_dir: PathBuf::from("out"),
            k_policy: KPolicy::default(),
            gmm: GmmConfig::default(),
            pos_dim: 17,
            ot: OtParams::default(),
            seed: 0,
            oov_policy: OovPolicy::Zero,
            copies: 1,
            threads: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| CliError::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_weights<const N: usize>(key: &str, value: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<f64> = value.split(',').map(|p| parse::<f64>(key, p.trim())).collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| CliError::config(key, format!("expected {N} comma-separated weights, got {}", v.len())))
}

fn join<const N: usize>(w: [f64; N]) -> String {
    w.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl PipelineConfig {
    /// Reads a config file on top of the defaults.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::MissingPath {
            what: "config".into(),
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::default();
        cfg.apply_text(&text, base)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(&format!("line {}", n + 1), format!("expected `key = value`, got `{line}`")))?;
            self.set(key.trim(), value.trim(), base)?;
        }
        Ok(())
    }

    /// Assigns one key; relative paths are joined onto `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        let path = || {
            let p = PathBuf::from(value);
            if p.is_absolute() { p } else { base.join(p) }
        };
        if let Some(lang) = key.strip_prefix("embeddings.") {
            self.embeddings.insert(lang.to_string(), path());
            return Ok(());
        }
        if let Some(lang) = key.strip_prefix("corpus.") {
            self.corpus.insert(lang.to_string(), path());
            return Ok(());
        }
        let krule = |v: &str| v.parse::<KRule>().map_err(|e| CliError::config(key, e.to_string()));
        match key {
            "taxonomy" => self.taxonomy = Some(path()),
            "output_dir" => self.output_dir = path(),
            "k.single" => self.k_policy.single = krule(value)?,
            "k.family" => self.k_policy.family = krule(value)?,
            "k.multi" => self.k_policy.multi = krule(value)?,
            "gmm.covariance" => {
                self.gmm.covariance = match value {
                    "diagonal" => CovarianceKind::Diagonal,
                    "spherical" => CovarianceKind::Spherical,
                    _ => return Err(CliError::config(key, format!("expected `diagonal` or `spherical`, got `{value}`"))),
                }
            }
            "gmm.max_iter" => self.gmm.max_iter = parse(key, value)?,
            "gmm.tol" => self.gmm.tol = parse(key, value)?,
            "gmm.cov_floor" => self.gmm.cov_floor = parse(key, value)?,
            "pos.dim" => self.pos_dim = parse(key, value)?,
            "ot.epsilon" => self.ot.epsilon = parse(key, value)?,
            "ot.p" => self.ot.p = parse(key, value)?,
            "ot.k" => self.ot.k = parse(key, value)?,
            "ot.eta" => self.ot.eta = parse(key, value)?,
            "ot.rho" => self.ot.rho = parse_weights(key, value)?,
            "ot.lambda" => self.ot.lambda = parse_weights(key, value)?,
            "sinkhorn.max_iter" => self.ot.sinkhorn_max_iter = parse(key, value)?,
            "sinkhorn.tol" => self.ot.sinkhorn_tol = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "copies" => self.copies = parse(key, value)?,
            "threads" => self.threads = Some(parse(key, value)?),
            "oov_policy" => {
                self.oov_policy = match value {
                    "zero" => OovPolicy::Zero,
                    "error" => OovPolicy::Error,
                    _ => return Err(CliError::config(key, format!("expected `zero` or `error`, got `{value}`"))),
                }
            }
            _ => return Err(CliError::config(key, "unknown key".into())),
        }
        Ok(())
    }

    /// Parameter checks that need no filesystem access.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() { Ok(()) } else { Err(CliError::config(key, format!("must be positive, got {v}"))) }
        };
        positive("gmm.tol", self.gmm.tol)?;
        positive("gmm.cov_floor", self.gmm.cov_floor)?;
        positive("ot.epsilon", self.ot.epsilon)?;
        positive("ot.eta", self.ot.eta)?;
        positive("sinkhorn.tol", self.ot.sinkhorn_tol)?;
        if !(self.ot.p >= 1.0) {
            return Err(CliError::config("ot.p", format!("must be >= 1, got {}", self.ot.p)));
        }
        for (key, n) in [("gmm.max_iter", self.gmm.max_iter), ("sinkhorn.max_iter", self.ot.sinkhorn_max_iter), ("ot.k", self.ot.k)] {
            if n == 0 {
                return Err(CliError::config(key, "must be >= 1".into()));
            }
        }
        if self.copies == 0 {
            return Err(CliError::config("copies", "must be >= 1".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads", "must be >= 1".into()));
        }
        compose_reg(0.0, 0.0, 0.0, self.ot.rho).map_err(|e| CliError::config("ot.rho", e.to_string()))?;
        compose_total(0.0, 0.0, self.ot.lambda).map_err(|e| CliError::config("ot.lambda", e.to_string()))?;
        Ok(())
    }

    pub fn require_taxonomy(&self) -> Result<&Path, CliError> {
        let p = self.taxonomy.as_deref().ok_or_else(|| CliError::config("taxonomy", "not set".into()))?;
        require_file("taxonomy", p)?;
        Ok(p)
    }

    pub fn require_embeddings(&self) -> Result<(), CliError> {
        if self.embeddings.is_empty() {
            return Err(CliError::config("embeddings", "no `embeddings.<lang>` entries".into()));
        }
        for (lang, p) in &self.embeddings {
            require_file(&format!("embeddings.{lang}"), p)?;
        }
        Ok(())
    }

    pub fn require_corpus(&self) -> Result<(), CliError> {
        if self.corpus.is_empty() {
            return Err(CliError::config("corpus", "no `corpus.<lang>` entries".into()));
        }
        for (lang, p) in &self.corpus {
            require_file(&format!("corpus.{lang}"), p)?;
        }
        Ok(())
    }

    /// The effective configuration as ordered key/value pairs, the same
    /// vocabulary the file format accepts.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        if let Some(t) = &self.taxonomy {
            put("taxonomy", t.display().to_string());
        }
        for (lang, p) in &self.embeddings {
            put(&format!("embeddings.{lang}"), p.display().to_string());
        }
        for (lang, p) in &self.corpus {
            put(&format!("corpus.{lang}"), p.display().to_string());
        }
        put("output_dir", self.output_dir.display().to_string());
        put("k.single", self.k_policy.single.to_string());
        put("k.family", self.k_policy.family.to_string());
        put("k.multi", self.k_policy.multi.to_string());
        put(
            "gmm.covariance",
            match self.gmm.covariance {
                CovarianceKind::Diagonal => "diagonal",
                CovarianceKind::Spherical => "spherical",
            }
            .into(),
        );
        put("gmm.max_iter", self.gmm.max_iter.to_string());
        put("gmm.tol", self.gmm.tol.to_string());
        put("gmm.cov_floor", self.gmm.cov_floor.to_string());
        put("pos.dim", self.pos_dim.to_string());
        put("ot.epsilon", self.ot.epsilon.to_string());
        put("ot.p", self.ot.p.to_string());
        put("ot.k", self.ot.k.to_string());
        put("ot.eta", self.ot.eta.to_string());
        put("ot.rho", join(self.ot.rho));
        put("ot.lambda", join(self.ot.lambda));
        put("sinkhorn.max_iter", self.ot.sinkhorn_max_iter.to_string());
        put("sinkhorn.tol", self.ot.sinkhorn_tol.to_string());
        put("seed", self.seed.to_string());
        put("copies", self.copies.to_string());
        if let Some(t) = self.threads {
            put("threads", t.to_string());
        }
        put(
            "oov_policy",
            match self.oov_policy {
                OovPolicy::Zero => "zero",
                OovPolicy::Error => "error",
            }
            .into(),
        );
        m
    }

    /// Settings that can change results, echoed into every artifact.
    /// `threads` is left out: it never changes an output byte.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = self.to_pairs();
        m.remove("threads");
        m
    }

    pub fn to_config_string(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// GMM settings with the pipeline seed folded in.
    pub fn gmm_config(&self) -> GmmConfig {
        GmmConfig { seed: self.seed, ..self.gmm }
    }
}

fn require_file(what: &str, p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingPath { what: what.into(), path: p.display().to_string(), message: "no such file".into() })
    }
}
