//! Byte-pair-encoding subword segmentation.
//!
//! Words start out as character sequences with the end-of-word marker glued
//! to the last character (`low` is `l o w</w>`). Learning repeatedly merges
//! the most frequent adjacent symbol pair, ties going to the
//! lexicographically smallest pair, and stops once no pair occurs twice.
//! Segmented output marks every non-final subword of a word with the
//! continuation marker (`lo@@ w`).

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::corpus::{self, Monotext, Sentence};
use crate::error::{Error, Result};

pub const DEFAULT_END_OF_WORD: &str = "</w>";
pub const DEFAULT_CONTINUATION: &str = "@@";
const MODEL_HEADER: &str = "#bpe-model version=1";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
}

impl MergeRule {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Self {
        MergeRule {
            left: left.into(),
            right: right.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpeModel {
    merges: Vec<MergeRule>,
    end_of_word: String,
    continuation: String,
    ranks: FxHashMap<String, FxHashMap<String, usize>>,
}

impl PartialEq for BpeModel {
    fn eq(&self, other: &Self) -> bool {
        self.merges == other.merges
            && self.end_of_word == other.end_of_word
            && self.continuation == other.continuation
    }
}

impl Eq for BpeModel {}

impl Default for BpeModel {
    fn default() -> Self {
        BpeModel::new(Vec::new())
    }
}

impl BpeModel {
    pub fn new(merges: Vec<MergeRule>) -> Self {
        Self::with_markers(merges, DEFAULT_END_OF_WORD, DEFAULT_CONTINUATION)
            .expect("default markers are valid")
    }

    pub fn with_markers(
        merges: Vec<MergeRule>,
        end_of_word: impl Into<String>,
        continuation: impl Into<String>,
    ) -> Result<Self> {
        let (end_of_word, continuation) = (end_of_word.into(), continuation.into());
        for marker in [&end_of_word, &continuation] {
            if marker.is_empty() || marker.contains(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!("invalid BPE marker {marker:?}")));
            }
        }
        let mut ranks: FxHashMap<String, FxHashMap<String, usize>> = FxHashMap::default();
        for (rank, m) in merges.iter().enumerate() {
            let merged = format!("{}{}", m.left, m.right);
            if merged == end_of_word || merged == continuation {
                return Err(Error::Format(format!(
                    "merge rule {} {} collides with a marker",
                    m.left, m.right
                )));
            }
            ranks
                .entry(m.left.clone())
                .or_default()
                .entry(m.right.clone())
                .or_insert(rank);
        }
        Ok(BpeModel {
            merges,
            end_of_word,
            continuation,
            ranks,
        })
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn end_of_word(&self) -> &str {
        &self.end_of_word
    }

    pub fn continuation(&self) -> &str {
        &self.continuation
    }

    fn rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(left)?.get(right).copied()
    }

    /// Segments one word into subwords, without continuation markers.
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        let mut symbols = initial_symbols(word, &self.end_of_word);
        loop {
            let best = symbols.windows(2).filter_map(|w| self.rank(&w[0], &w[1])).min();
            let Some(rank) = best else { break };
            let rule = &self.merges[rank];
            symbols = merge_pair(symbols, &rule.left, &rule.right);
        }
        if let Some(last) = symbols.last_mut() {
            last.truncate(last.len() - self.end_of_word.len());
        }
        symbols
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = corpus::open_output(path)?;
        let io = |e| Error::io(path, e);
        writeln!(
            out,
            "{MODEL_HEADER} end_of_word={} continuation={}",
            self.end_of_word, self.continuation
        )
        .map_err(io)?;
        for m in &self.merges {
            writeln!(out, "{} {}", m.left, m.right).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let lines = corpus::read_lines(path)?;
        let mut lines = lines.iter();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty BPE model file".into()))?;
        let rest = header
            .strip_prefix(MODEL_HEADER)
            .ok_or_else(|| Error::Format(format!("unrecognized BPE model header {header:?}")))?;
        let (mut eow, mut cont) = (None, None);
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("end_of_word", v)) => eow = Some(v),
                Some(("continuation", v)) => cont = Some(v),
                _ => return Err(Error::Format(format!("unknown header field {field:?}"))),
            }
        }
        let merges = lines
            .enumerate()
            .map(|(i, line)| {
                let mut parts = line.split(' ');
                match (parts.next(), parts.next(), parts.next()) {
                    (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => Ok(MergeRule::new(l, r)),
                    _ => Err(Error::Format(format!(
                        "line {}: malformed merge rule {line:?}",
                        i + 2
                    ))),
                }
            })
            .collect::<Result<_>>()?;
        BpeModel::with_markers(
            merges,
            eow.unwrap_or(DEFAULT_END_OF_WORD),
            cont.unwrap_or(DEFAULT_CONTINUATION),
        )
    }
}

fn initial_symbols(word: &str, end_of_word: &str) -> Vec<String> {
    let mut symbols: Vec<String> = word.chars().map(String::from).collect();
    if let Some(last) = symbols.last_mut() {
        last.push_str(end_of_word);
    }
    symbols
}

fn merge_pair(symbols: Vec<String>, left: &str, right: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut it = symbols.into_iter().peekable();
    while let Some(s) = it.next() {
        if s == left && it.peek().is_some_and(|n| n == right) {
            let n = it.next().unwrap();
            out.push(s + &n);
        } else {
            out.push(s);
        }
    }
    out
}

/// Result of learning: the model plus the pair frequency each rule had when it was chosen.
#[derive(Debug, Clone)]
pub struct LearnedBpe {
    pub model: BpeModel,
    pub frequencies: Vec<u64>,
}

pub fn learn_bpe(corpus: &Monotext, num_merges: usize) -> Result<BpeModel> {
    learn_bpe_with_frequencies(corpus, num_merges, DEFAULT_END_OF_WORD, DEFAULT_CONTINUATION).map(|l| l.model)
}

type Pair = (u32, u32);

struct Learner {
    symbols: Vec<String>,
    symbol_ids: FxHashMap<String, u32>,
    words: Vec<(Vec<u32>, u64)>,
    pair_counts: FxHashMap<Pair, u64>,
    pair_words: FxHashMap<Pair, FxHashSet<usize>>,
}

#[derive(PartialEq, Eq)]
struct Candidate {
    count: u64,
    pair: Reverse<(String, String)>,
    ids: Pair,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| self.pair.cmp(&other.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Learner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.symbol_ids.get(s) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(s.to_owned());
        self.symbol_ids.insert(s.to_owned(), id);
        id
    }

    fn candidate(&self, ids: Pair) -> Candidate {
        Candidate {
            count: self.pair_counts.get(&ids).copied().unwrap_or(0),
            pair: Reverse((
                self.symbols[ids.0 as usize].clone(),
                self.symbols[ids.1 as usize].clone(),
            )),
            ids,
        }
    }

    fn count_word(&mut self, w: usize, sign_add: bool, touched: &mut FxHashSet<Pair>) {
        let (ref syms, freq) = self.words[w];
        for win in syms.windows(2) {
            let pair = (win[0], win[1]);
            let c = self.pair_counts.entry(pair).or_insert(0);
            if sign_add {
                *c += freq;
                self.pair_words.entry(pair).or_default().insert(w);
            } else {
                *c -= freq;
            }
            touched.insert(pair);
        }
    }

    fn apply_merge(&mut self, pair: Pair, merged: u32) -> FxHashSet<Pair> {
        let mut touched = FxHashSet::default();
        let mut words: Vec<usize> = self
            .pair_words
            .remove(&pair)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        words.sort_unstable();
        for w in words {
            let syms = &self.words[w].0;
            if !syms.windows(2).any(|x| (x[0], x[1]) == pair) {
                continue;
            }
            self.count_word(w, false, &mut touched);
            let old = std::mem::take(&mut self.words[w].0);
            let mut new = Vec::with_capacity(old.len());
            let mut i = 0;
            while i < old.len() {
                if i + 1 < old.len() && (old[i], old[i + 1]) == pair {
                    new.push(merged);
                    i += 2;
                } else {
                    new.push(old[i]);
                    i += 1;
                }
            }
            self.words[w].0 = new;
            self.count_word(w, true, &mut touched);
        }
        self.pair_counts.retain(|_, c| *c > 0);
        touched
    }
}

/// Learns up to `num_merges` rules, recording each rule's pair frequency.
pub fn learn_bpe_with_frequencies(
    corpus: &Monotext,
    num_merges: usize,
    end_of_word: &str,
    continuation: &str,
) -> Result<LearnedBpe> {
    let mut word_freq: FxHashMap<&str, u64> = FxHashMap::default();
    for s in corpus.iter() {
        for t in s.tokens() {
            *word_freq.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    if word_freq.is_empty() {
        return Err(Error::EmptyInput("BPE training corpus has no tokens"));
    }
    // validates markers before any work
    BpeModel::with_markers(Vec::new(), end_of_word, continuation)?;

    let mut entries: Vec<(&str, u64)> = word_freq.into_iter().collect();
    entries.sort_unstable();

    let mut learner = Learner {
        symbols: Vec::new(),
        symbol_ids: FxHashMap::default(),
        words: Vec::with_capacity(entries.len()),
        pair_counts: FxHashMap::default(),
        pair_words: FxHashMap::default(),
    };
    for (word, freq) in entries {
        let syms = initial_symbols(word, end_of_word)
            .iter()
            .map(|s| learner.intern(s))
            .collect();
        learner.words.push((syms, freq));
    }
    let mut touched = FxHashSet::default();
    for w in 0..learner.words.len() {
        learner.count_word(w, true, &mut touched);
    }
    let mut heap: BinaryHeap<Candidate> = learner
        .pair_counts
        .keys()
        .map(|&p| learner.candidate(p))
        .collect();

    let mut merges = Vec::new();
    let mut frequencies = Vec::new();
    while merges.len() < num_merges {
        let Some(top) = heap.pop() else { break };
        let current = learner.pair_counts.get(&top.ids).copied().unwrap_or(0);
        if current != top.count {
            // stale; a fresher entry was pushed when the count changed
            continue;
        }
        if top.count < 2 {
            break;
        }
        let Reverse((left, right)) = top.pair;
        let merged = format!("{left}{right}");
        if merged == end_of_word || merged == continuation {
            continue;
        }
        let merged_id = learner.intern(&merged);
        for p in learner.apply_merge(top.ids, merged_id) {
            if learner.pair_counts.contains_key(&p) {
                heap.push(learner.candidate(p));
            }
        }
        merges.push(MergeRule::new(left, right));
        frequencies.push(top.count);
    }
    Ok(LearnedBpe {
        model: BpeModel::with_markers(merges, end_of_word, continuation)?,
        frequencies,
    })
}

pub fn apply_bpe(sentence: &Sentence, model: &BpeModel) -> Sentence {
    let mut out = Vec::with_capacity(sentence.len());
    for token in sentence.tokens() {
        let subwords = model.segment_word(token);
        let last = subwords.len().saturating_sub(1);
        for (i, mut sub) in subwords.into_iter().enumerate() {
            if i < last {
                sub.push_str(&model.continuation);
            }
            out.push(sub);
        }
    }
    Sentence::from_tokens(out)
}

/// Rejoins continuation-marked subwords into words.
pub fn decode_bpe(sentence: &Sentence, model: &BpeModel) -> Result<Sentence> {
    let mut out = Vec::with_capacity(sentence.len());
    let mut pending = String::new();
    for token in sentence.tokens() {
        match token.strip_suffix(model.continuation.as_str()) {
            Some(prefix) => pending.push_str(prefix),
            None => {
                pending.push_str(token);
                out.push(std::mem::take(&mut pending));
            }
        }
    }
    if !pending.is_empty()
        || sentence
            .tokens()
            .last()
            .is_some_and(|t| t.ends_with(&model.continuation))
    {
        return Err(Error::Format(format!(
            "dangling continuation marker {:?} at end of sentence",
            model.continuation
        )));
    }
    Ok(Sentence::from_tokens(out))
}

pub fn apply_bpe_corpus(corpus: &Monotext, model: &BpeModel) -> Monotext {
    Monotext::new(corpus.sentences.par_iter().map(|s| apply_bpe(s, model)).collect())
}

pub fn decode_bpe_corpus(corpus: &Monotext, model: &BpeModel) -> Result<Monotext> {
    corpus
        .sentences
        .par_iter()
        .enumerate()
        .map(|(i, s)| decode_bpe(s, model).map_err(|e| Error::Format(format!("line {}: {e}", i + 1))))
        .collect::<Result<Vec<_>>>()
        .map(Monotext::new)
}
