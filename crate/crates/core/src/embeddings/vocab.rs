use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::EmbeddingError;

/// Per-language word → vector table, row-major, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabStore {
    lang: String,
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl VocabStore {
    pub fn new(lang: impl Into<String>, dim: usize) -> Self {
        Self { lang: lang.into(), dim, words: Vec::new(), index: HashMap::new(), data: Vec::new() }
    }

    /// Builds a store from in-memory entries; `line` in errors is the 1-based entry index.
    pub fn from_entries<I, W>(lang: impl Into<String>, dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (W, Vec<f64>)>,
        W: Into<String>,
    {
        let mut store = Self::new(lang, dim);
        for (i, (w, v)) in entries.into_iter().enumerate() {
            store.push(i + 1, w.into(), &v)?;
        }
        Ok(store)
    }

    fn push(&mut self, line: usize, word: String, vec: &[f64]) -> Result<(), EmbeddingError> {
        if vec.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch { line, expected: self.dim, found: vec.len() });
        }
        if vec.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite { line, word });
        }
        if self.index.contains_key(&word) {
            return Err(EmbeddingError::DuplicateWord { line, word });
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vec);
        Ok(())
    }

    /// Loads a word2vec text file: `N d` header, then `word v1 .. vd` per line.
    pub fn load(path: impl AsRef<Path>, lang: &str) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let io_err = |e: std::io::Error| EmbeddingError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let file = File::open(path).map_err(io_err)?;
        Self::read(BufReader::new(file), lang).map_err(|e| match e {
            EmbeddingError::Io { message, .. } => {
                EmbeddingError::Io { path: path.display().to_string(), message }
            }
            other => other,
        })
    }

    pub fn read<R: BufRead>(reader: R, lang: &str) -> Result<Self, EmbeddingError> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((i, line)) => {
                    let line = line.map_err(|e| EmbeddingError::Io { path: String::new(), message: e.to_string() })?;
                    if !line.trim().is_empty() {
                        break (i + 1, line);
                    }
                }
                None => {
                    return Err(EmbeddingError::Header { line: 1, message: "empty file".into() });
                }
            }
        };
        let (header_line, header) = header;
        let mut parts = header.split_whitespace();
        let parse_field = |s: Option<&str>, what: &str| -> Result<usize, EmbeddingError> {
            s.ok_or_else(|| EmbeddingError::Header { line: header_line, message: format!("missing {what}") })?
                .parse::<usize>()
                .map_err(|e| EmbeddingError::Header { line: header_line, message: format!("{what}: {e}") })
        };
        let count = parse_field(parts.next(), "vector count")?;
        let dim = parse_field(parts.next(), "dimension")?;
        if parts.next().is_some() {
            return Err(EmbeddingError::Header { line: header_line, message: "trailing fields".into() });
        }
        if dim == 0 {
            return Err(EmbeddingError::Header { line: header_line, message: "dimension must be positive".into() });
        }

        let mut store = Self::new(lang, dim);
        let mut buf = Vec::with_capacity(dim);
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| EmbeddingError::Io { path: String::new(), message: e.to_string() })?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            buf.clear();
            for f in fields {
                let v = f.parse::<f64>().map_err(|_| EmbeddingError::Header {
                    line: line_no,
                    message: format!("cannot parse `{f}` as a number"),
                })?;
                buf.push(v);
            }
            store.push(line_no, word.to_string(), &buf)?;
        }
        if store.len() != count {
            return Err(EmbeddingError::CountMismatch { declared: count, found: store.len() });
        }
        Ok(store)
    }

    /// Writes the store back in word2vec text format.
    pub fn to_word2vec_string(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (w, v) in self.iter() {
            out.push_str(w);
            for x in v {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Entries in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words.iter().enumerate().map(|(i, w)| (w.as_str(), self.row(i)))
    }
}
