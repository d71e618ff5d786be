use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EmbeddingError, Upos};

/// Subject / verb / object token positions (0-based); any role may be absent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Svo {
    pub subject: Option<usize>,
    pub verb: Option<usize>,
    pub object: Option<usize>,
}

impl Svo {
    pub fn is_empty(&self) -> bool {
        self.subject.is_none() && self.verb.is_none() && self.object.is_none()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> {
        [self.subject, self.verb, self.object].into_iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    /// `# sent_id` when present, else `{lang}-{n}` with `n` the 1-based block index.
    pub id: String,
    pub lang: String,
    pub tokens: Vec<String>,
    pub upos: Vec<Option<Upos>>,
    pub svo: Svo,
}

impl SentenceRecord {
    pub fn new(id: impl Into<String>, lang: impl Into<String>, tokens: Vec<String>, svo: Svo) -> Self {
        let upos = vec![None; tokens.len()];
        Self { id: id.into(), lang: lang.into(), tokens, upos, svo }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// SVO indices in range and pairwise distinct; `upos` aligned with tokens.
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.upos.len() != self.tokens.len() {
            return Err(EmbeddingError::Sentence(format!("{}: upos/token length mismatch", self.id)));
        }
        let pos: Vec<usize> = self.svo.positions().collect();
        for (i, &p) in pos.iter().enumerate() {
            if p >= self.tokens.len() {
                return Err(EmbeddingError::Sentence(format!("{}: SVO index {p} out of range", self.id)));
            }
            if pos[..i].contains(&p) {
                return Err(EmbeddingError::Sentence(format!("{}: repeated SVO index {p}", self.id)));
            }
        }
        Ok(())
    }
}

pub fn read_conllu(path: impl AsRef<Path>, lang: &str) -> Result<Vec<SentenceRecord>, EmbeddingError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EmbeddingError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_conllu(&text, lang)
}

/// Strict parse: the first malformed line fails the whole corpus.
pub fn parse_conllu(text: &str, lang: &str) -> Result<Vec<SentenceRecord>, EmbeddingError> {
    blocks(text, lang).into_iter().collect()
}

/// Lenient parse: malformed sentence blocks are dropped and their errors returned.
pub fn parse_conllu_lenient(text: &str, lang: &str) -> (Vec<SentenceRecord>, Vec<EmbeddingError>) {
    let mut ok = Vec::new();
    let mut errs = Vec::new();
    for r in blocks(text, lang) {
        match r {
            Ok(rec) => ok.push(rec),
            Err(e) => errs.push(e),
        }
    }
    (ok, errs)
}

struct Token {
    form: String,
    upos: Option<Upos>,
    deprel: String,
}

#[derive(Default)]
struct Block {
    sent_id: Option<String>,
    tokens: Vec<Token>,
    error: Option<EmbeddingError>,
}

fn blocks(text: &str, lang: &str) -> Vec<Result<SentenceRecord, EmbeddingError>> {
    let mut out = Vec::new();
    let mut cur = Block::default();
    let mut n = 0usize;
    let mut flush = |cur: &mut Block, out: &mut Vec<_>| {
        let block = std::mem::take(cur);
        if let Some(e) = block.error {
            n += 1;
            out.push(Err(e));
        } else if !block.tokens.is_empty() {
            n += 1;
            let id = block.sent_id.unwrap_or_else(|| format!("{lang}-{n}"));
            out.push(Ok(finish(id, lang, block.tokens)));
        }
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut cur, &mut out);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    cur.sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        if cur.error.is_some() {
            continue;
        }
        match parse_token_line(line, line_no) {
            Ok(Some(tok)) => cur.tokens.push(tok),
            Ok(None) => {}
            Err(e) => cur.error = Some(e),
        }
    }
    flush(&mut cur, &mut out);
    out
}

fn parse_token_line(line: &str, line_no: usize) -> Result<Option<Token>, EmbeddingError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(EmbeddingError::Conllu {
            line: line_no,
            message: format!("expected 10 tab-separated columns, found {}", cols.len()),
        });
    }
    let id = cols[0];
    // multiword ranges (`1-2`) and empty nodes (`1.1`) carry no token of their own
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    if id.parse::<usize>().map_or(true, |v| v == 0) {
        return Err(EmbeddingError::Conllu { line: line_no, message: format!("invalid token id `{id}`") });
    }
    let upos = match cols[3] {
        "_" => None,
        tag => Some(tag.parse::<Upos>().map_err(|_| EmbeddingError::Conllu {
            line: line_no,
            message: format!("unknown UPOS tag `{tag}`"),
        })?),
    };
    Ok(Some(Token { form: cols[1].to_string(), upos, deprel: cols[7].to_string() }))
}

fn base_relation(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

/// subject: first `nsubj`; verb: the `root` if it is a VERB, else the first
/// VERB not already used as subject/object; object: first `obj`.
fn finish(id: String, lang: &str, tokens: Vec<Token>) -> SentenceRecord {
    let first = |rel: &str| tokens.iter().position(|t| base_relation(&t.deprel) == rel);
    let subject = first("nsubj");
    let object = first("obj").filter(|&o| Some(o) != subject);
    let taken = |i: usize| Some(i) == subject || Some(i) == object;
    let verb = tokens
        .iter()
        .position(|t| t.deprel == "root" && t.upos == Some(Upos::Verb))
        .filter(|&i| !taken(i))
        .or_else(|| (0..tokens.len()).find(|&i| tokens[i].upos == Some(Upos::Verb) && !taken(i)));
    SentenceRecord {
        id,
        lang: lang.to_string(),
        upos: tokens.iter().map(|t| t.upos).collect(),
        tokens: tokens.into_iter().map(|t| t.form).collect(),
        svo: Svo { subject, verb, object },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, form: &str, upos: &str, head: &str, rel: &str) -> String {
        format!("{id}\t{form}\t{form}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n")
    }

    #[test]
    fn svo_from_deprels() {
        let text = line("1", "dogs", "NOUN", "2", "nsubj")
            + &line("2", "chase", "VERB", "0", "root")
            + &line("3", "cats", "NOUN", "2", "obj");
        let recs = parse_conllu(&text, "en").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].svo, Svo { subject: Some(0), verb: Some(1), object: Some(2) });
        assert_eq!(recs[0].id, "en-1");
        assert_eq!(recs[0].upos[1], Some(Upos::Verb));
    }

    #[test]
    fn missing_object_and_non_verb_root() {
        let text = line("1", "she", "PRON", "3", "nsubj")
            + &line("2", "can", "AUX", "3", "aux")
            + &line("3", "happy", "ADJ", "0", "root")
            + &line("4", "sleeps", "VERB", "3", "conj");
        let recs = parse_conllu(&text, "en").unwrap();
        assert_eq!(recs[0].svo, Svo { subject: Some(0), verb: Some(3), object: None });
    }

    #[test]
    fn comments_multiword_and_ids() {
        let text = String::from("# newdoc\n# sent_id = s-42\n# text = du chat\n")
            + "1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_\n"
            + &line("1", "de", "ADP", "3", "case")
            + &line("2", "le", "DET", "3", "det")
            + &line("3", "chat", "NOUN", "0", "root")
            + "\n# only a comment\n\n"
            + &line("1", "x", "X", "0", "root");
        let recs = parse_conllu(&text, "fr").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].id, "s-42");
        assert_eq!(recs[0].tokens, vec!["de", "le", "chat"]);
        assert!(recs[0].svo.is_empty());
        assert_eq!(recs[1].id, "fr-2");
    }

    #[test]
    fn subtyped_relations_match_base() {
        let text = line("1", "it", "PRON", "2", "nsubj:pass") + &line("2", "was", "VERB", "0", "root");
        let recs = parse_conllu(&text, "en").unwrap();
        assert_eq!(recs[0].svo.subject, Some(0));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let bad_cols = "1\tonly\tthree\n";
        assert_eq!(
            parse_conllu(bad_cols, "en").unwrap_err(),
            EmbeddingError::Conllu { line: 1, message: "expected 10 tab-separated columns, found 3".into() }
        );
        let bad_id = String::from("# c\n") + &line("x", "a", "NOUN", "0", "root");
        assert!(matches!(parse_conllu(&bad_id, "en").unwrap_err(), EmbeddingError::Conllu { line: 2, .. }));
    }

    #[test]
    fn lenient_skips_bad_blocks() {
        let text = line("1", "a", "NOUN", "0", "root") + "\n" + "bad line\n\n" + &line("1", "b", "NOUN", "0", "root");
        let (ok, errs) = parse_conllu_lenient(&text, "en");
        assert_eq!(ok.len(), 2);
        assert_eq!(errs.len(), 1);
        assert_eq!(ok[1].id, "en-3");
    }

    #[test]
    fn block_count_matches_token_blocks() {
        let text = String::from("\n\n") + &line("1", "a", "NOUN", "0", "root") + "\n\n\n" + &line("1", "b", "NOUN", "0", "root") + "\n";
        assert_eq!(parse_conllu(&text, "en").unwrap().len(), 2);
    }
}
