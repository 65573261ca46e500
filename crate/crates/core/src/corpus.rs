//! Sentences, aligned bitext and line-oriented corpus I/O.
//!
//! Corpora are plain UTF-8 text with one sentence per line. A bitext is a
//! pair of such files with equal line counts. The path `-` stands for
//! standard input (when loading) or standard output (when saving).

use std::borrow::Cow;
use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization as _};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnicodeNormalization {
    None,
    #[default]
    CanonicalComposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub unicode_normalization: UnicodeNormalization,
}

/// One line of text together with its whitespace tokens.
///
/// `raw` is kept verbatim so that saving a loaded corpus reproduces the
/// input byte for byte; normalization and case folding only affect `tokens`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    raw: String,
    tokens: Vec<String>,
}

impl Sentence {
    /// Builds a sentence from tokens, with the raw text being the tokens joined by single spaces.
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        debug_assert!(tokens
            .iter()
            .all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        Sentence {
            raw: tokens.join(" "),
            tokens,
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Length in tokens.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits `text` on Unicode whitespace after normalization.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Result<Sentence> {
    if text.contains('\n') {
        return Err(Error::EmbeddedNewline { line: 1 });
    }
    Ok(tokenize_line(text.to_owned(), config))
}

/// Like [`tokenize`] but starting from raw bytes, reporting the byte offset of
/// the first invalid UTF-8 sequence.
pub fn tokenize_bytes(bytes: &[u8], config: &TokenizerConfig) -> Result<Sentence> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Decode {
        line: None,
        offset: e.valid_up_to(),
    })?;
    tokenize(text, config)
}

fn tokenize_line(raw: String, config: &TokenizerConfig) -> Sentence {
    let normalized: Cow<'_, str> = match config.unicode_normalization {
        UnicodeNormalization::CanonicalComposed if is_nfc_quick(raw.chars()) != IsNormalized::Yes => {
            Cow::Owned(raw.nfc().collect())
        }
        _ => Cow::Borrowed(&raw),
    };
    let folded = if config.lowercase {
        Cow::Owned(normalized.to_lowercase())
    } else {
        normalized
    };
    let tokens = folded.split_whitespace().map(str::to_owned).collect();
    drop(folded);
    Sentence { raw, tokens }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Authentic,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: Sentence,
    pub target: Sentence,
    origin: Origin,
}

impl SentencePair {
    pub fn new(source: Sentence, target: Sentence, origin: Origin) -> Self {
        SentencePair {
            source,
            target,
            origin,
        }
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bitext {
    pub pairs: Vec<SentencePair>,
}

impl Bitext {
    pub fn new(pairs: Vec<SentencePair>) -> Self {
        Bitext { pairs }
    }

    /// Zips two monotexts into pairs with the given origin.
    pub fn zip(source: Monotext, target: Monotext, origin: Origin) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::Alignment {
                left: source.len(),
                right: target.len(),
            });
        }
        let pairs = source
            .sentences
            .into_iter()
            .zip(target.sentences)
            .map(|(s, t)| SentencePair::new(s, t, origin))
            .collect();
        Ok(Bitext { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> Monotext {
        Monotext::new(self.pairs.iter().map(|p| p.source.clone()).collect())
    }

    pub fn targets(&self) -> Monotext {
        Monotext::new(self.pairs.iter().map(|p| p.target.clone()).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Monotext {
    pub sentences: Vec<Sentence>,
}

impl Monotext {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Monotext { sentences }
    }

    /// Tokenizes each line; lines must not contain newlines.
    pub fn from_lines<S: AsRef<str>>(
        lines: impl IntoIterator<Item = S>,
        config: &TokenizerConfig,
    ) -> Result<Self> {
        let sentences = lines
            .into_iter()
            .enumerate()
            .map(|(i, l)| tokenize(l.as_ref(), config).map_err(|_| Error::EmbeddedNewline { line: i + 1 }))
            .collect::<Result<_>>()?;
        Ok(Monotext { sentences })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sentence> {
        self.sentences.iter()
    }
}

impl FromIterator<Sentence> for Monotext {
    fn from_iter<I: IntoIterator<Item = Sentence>>(iter: I) -> Self {
        Monotext::new(iter.into_iter().collect())
    }
}

/// A contiguous token subsequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ngram {
    pub tokens: Vec<String>,
}

impl Ngram {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        Ngram {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.tokens.len()
    }
}

/// Counts every n-gram of order `1..=max_order` in the sentence.
pub fn extract_ngrams(sentence: &Sentence, max_order: usize) -> HashMap<Ngram, usize> {
    let mut counts = HashMap::new();
    let tokens = sentence.tokens();
    for n in 1..=max_order.min(tokens.len()) {
        for window in tokens.windows(n) {
            *counts.entry(Ngram::new(window.iter().cloned())).or_insert(0) += 1;
        }
    }
    counts
}

pub(crate) fn read_input(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin()
            .lock()
            .read_to_end(&mut buf)
            .map_err(|e| Error::io(path, e))?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(buf)
}

/// Splits file contents into lines; a final line without a trailing newline still counts.
fn split_lines(bytes: &[u8]) -> Vec<&[u8]> {
    if bytes.is_empty() {
        return Vec::new();
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|&b| b == b'\n').collect()
}

/// Reads a file into lines of text, validating UTF-8.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let bytes = read_input(path)?;
    split_lines(&bytes)
        .into_iter()
        .enumerate()
        .map(|(i, line)| {
            std::str::from_utf8(line)
                .map(str::to_owned)
                .map_err(|e| Error::Decode {
                    line: Some(i + 1),
                    offset: e.valid_up_to(),
                })
        })
        .collect()
}

pub fn load_monotext(path: impl AsRef<Path>, config: &TokenizerConfig) -> Result<Monotext> {
    let lines = read_lines(path)?;
    Ok(Monotext::new(
        lines.into_iter().map(|l| tokenize_line(l, config)).collect(),
    ))
}

pub fn load_bitext(
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
    config: &TokenizerConfig,
) -> Result<Bitext> {
    let source = load_monotext(source_path, config)?;
    let target = load_monotext(target_path, config)?;
    Bitext::zip(source, target, Origin::Authentic)
}

pub(crate) fn open_output(path: &Path) -> Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

/// Writes lines with a trailing newline on each.
pub fn write_lines<S: AsRef<str>>(path: impl AsRef<Path>, lines: impl IntoIterator<Item = S>) -> Result<()> {
    let path = path.as_ref();
    let mut out = open_output(path)?;
    for line in lines {
        out.write_all(line.as_ref().as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn save_monotext(monotext: &Monotext, path: impl AsRef<Path>) -> Result<()> {
    write_lines(path, monotext.iter().map(Sentence::raw))
}

pub fn save_bitext(
    bitext: &Bitext,
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
) -> Result<()> {
    write_lines(source_path, bitext.pairs.iter().map(|p| p.source.raw()))?;
    write_lines(target_path, bitext.pairs.iter().map(|p| p.target.raw()))
}

/// Writes one origin tag (`authentic` / `synthetic`) per pair.
pub fn save_origins(bitext: &Bitext, path: impl AsRef<Path>) -> Result<()> {
    write_lines(
        path,
        bitext.pairs.iter().map(|p| match p.origin() {
            Origin::Authentic => "authentic",
            Origin::Synthetic => "synthetic",
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &Sentence) -> Vec<&str> {
        s.tokens().iter().map(String::as_str).collect()
    }

    fn cfg() -> TokenizerConfig {
        TokenizerConfig::default()
    }

    #[test]
    fn whitespace_split() {
        let s = tokenize("joan behar dut?", &cfg()).unwrap();
        assert_eq!(toks(&s), ["joan", "behar", "dut?"]);
        assert_eq!(s.len(), 3);
        assert!(tokenize("", &cfg()).unwrap().is_empty());
        assert_eq!(toks(&tokenize("  a \t b  ", &cfg()).unwrap()), ["a", "b"]);
    }

    #[test]
    fn normalization_and_case() {
        // decomposed e + combining acute
        let s = tokenize("Cafe\u{301}", &cfg()).unwrap();
        assert_eq!(toks(&s), ["Caf\u{e9}"]);
        assert_eq!(s.raw(), "Cafe\u{301}");
        let lower = TokenizerConfig {
            lowercase: true,
            unicode_normalization: UnicodeNormalization::None,
        };
        assert_eq!(toks(&tokenize("Cafe\u{301}", &lower).unwrap()), ["cafe\u{301}"]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            tokenize_bytes(b"ab\xffcd", &cfg()),
            Err(Error::Decode { offset: 2, .. })
        ));
        assert!(tokenize("a\nb", &cfg()).is_err());
    }

    #[test]
    fn ngram_enumeration() {
        let s = Sentence::from_tokens(["the", "cat"]);
        let g = extract_ngrams(&s, 3);
        assert_eq!(g.len(), 3);
        assert_eq!(g[&Ngram::new(["the"])], 1);
        assert_eq!(g[&Ngram::new(["cat"])], 1);
        assert_eq!(g[&Ngram::new(["the", "cat"])], 1);

        let g = extract_ngrams(&Sentence::from_tokens(["a", "a"]), 2);
        assert_eq!(g[&Ngram::new(["a"])], 2);
        assert_eq!(g[&Ngram::new(["a", "a"])], 1);

        let g = extract_ngrams(&Sentence::from_tokens(["a", "b", "c"]), 2);
        assert_eq!(g.values().sum::<usize>(), 5);

        assert!(extract_ngrams(&Sentence::from_tokens(Vec::<String>::new()), 3).is_empty());
    }

    #[test]
    fn bitext_io() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = (dir.path().join("s"), dir.path().join("t"));
        std::fs::write(&s, "a b\nc @@ d\ne\n").unwrap();
        std::fs::write(&t, "x\ny\nz\n").unwrap();
        let bt = load_bitext(&s, &t, &cfg()).unwrap();
        assert_eq!(bt.len(), 3);
        assert_eq!(bt.pairs[1].source.raw(), "c @@ d");
        assert_eq!(bt.pairs[2].target.raw(), "z");
        assert!(bt.pairs.iter().all(|p| p.origin() == Origin::Authentic));

        let (s2, t2) = (dir.path().join("s2"), dir.path().join("t2"));
        save_bitext(&bt, &s2, &t2).unwrap();
        assert_eq!(std::fs::read(&s).unwrap(), std::fs::read(&s2).unwrap());
        assert_eq!(std::fs::read(&t).unwrap(), std::fs::read(&t2).unwrap());
        assert_eq!(load_bitext(&s2, &t2, &cfg()).unwrap(), bt);
    }

    #[test]
    fn bitext_mismatch_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = (dir.path().join("s"), dir.path().join("t"));
        std::fs::write(&s, "1\n2\n3\n4\n5\n").unwrap();
        std::fs::write(&t, "1\n2\n3\n4\n5\n6\n").unwrap();
        assert!(matches!(
            load_bitext(&s, &t, &cfg()),
            Err(Error::Alignment { left: 5, right: 6 })
        ));

        std::fs::write(&s, "").unwrap();
        std::fs::write(&t, "").unwrap();
        let bt = load_bitext(&s, &t, &cfg()).unwrap();
        assert!(bt.is_empty());
        save_bitext(&bt, &s, &t).unwrap();
        assert_eq!(std::fs::read(&s).unwrap().len(), 0);
        assert_eq!(std::fs::read(&t).unwrap().len(), 0);
    }

    #[test]
    fn io_errors_carry_path() {
        let err = load_monotext("/nonexistent/corpus.txt", &cfg()).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/corpus.txt"));
    }

    #[test]
    fn decode_error_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad");
        std::fs::write(&p, b"ok\nfine\xc3(\n").unwrap();
        assert!(matches!(
            load_monotext(&p, &cfg()),
            Err(Error::Decode {
                line: Some(2),
                offset: 4
            })
        ));
    }

    proptest! {
        #[test]
        fn ngram_occurrences_closed_form(
            tokens in proptest::collection::vec("[a-c]{1,2}", 0..20),
            max_order in 1usize..6,
        ) {
            let k = tokens.len();
            let s = Sentence::from_tokens(tokens);
            let total: usize = extract_ngrams(&s, max_order).values().sum();
            let expected: usize = (1..=max_order.min(k)).map(|n| k - n + 1).sum();
            prop_assert_eq!(total, expected);
        }

        #[test]
        fn monotext_round_trip(lines in proptest::collection::vec("[a-zé @\t]{0,12}", 0..15)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m");
            let mono = Monotext::from_lines(&lines, &cfg()).unwrap();
            save_monotext(&mono, &path).unwrap();
            let bytes = std::fs::read(&path).unwrap();
            let expected: String = lines.iter().map(|l| format!("{l}\n")).collect();
            prop_assert_eq!(bytes, expected.into_bytes());
            prop_assert_eq!(load_monotext(&path, &cfg()).unwrap(), mono);
        }

        #[test]
        fn tokenize_is_deterministic(text in "\\PC{0,30}") {
            let a = tokenize(&text, &cfg()).unwrap();
            let b = tokenize(&text, &cfg()).unwrap();
            prop_assert!(a.tokens().iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
            prop_assert_eq!(a, b);
        }
    }
}
