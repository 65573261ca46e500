//! Feature Decay Algorithm (FDA) data selection.
//!
//! A candidate sentence `s` is scored against the n-gram features of a seed
//! text given the pool `L` of sentences selected so far:
//!
//! ```text
//! score(s | L) = sum_{g in s, g in seed} decay_base ^ C_L(g) / |s|
//! ```
//!
//! where `C_L(g)` counts occurrences of `g` in `L` and the sum runs over
//! occurrences, so a repeated n-gram contributes once per occurrence. The
//! best candidate is appended to `L` and the process repeats.
//!
//! Because `decay_base < 1` a candidate's score can only fall as `L` grows,
//! so a stored score is an upper bound on the current one. Selection keeps
//! all candidates in a max-heap keyed by their last computed score and
//! re-scores only the heap top: if the refreshed score still beats the next
//! entry it is the true maximum, otherwise it goes back into the heap.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{Monotext, Ngram, Sentence};
use crate::error::{Error, Result};

const NO_TOKEN: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdaConfig {
    pub max_order: usize,
    pub decay_base: f64,
    pub selection_size: usize,
}

impl Default for FdaConfig {
    fn default() -> Self {
        FdaConfig {
            max_order: 3,
            decay_base: 0.5,
            selection_size: 50_000,
        }
    }
}

impl FdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(Error::InvalidConfig("max n-gram order must be at least 1".into()));
        }
        if !(self.decay_base > 0.0 && self.decay_base < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "decay base must lie strictly between 0 and 1, got {}",
                self.decay_base
            )));
        }
        if self.selection_size == 0 {
            return Err(Error::InvalidConfig("selection size must be at least 1".into()));
        }
        Ok(())
    }
}

/// The set of n-grams occurring in the seed text.
///
/// Tokens and n-grams are interned to dense ids; only tokens seen in the seed
/// get an id, since no other token can be part of a feature.
#[derive(Debug, Clone)]
pub struct SeedProfile {
    max_order: usize,
    vocab: FxHashMap<String, u32>,
    index: FxHashMap<Box<[u32]>, u32>,
    features: Vec<Ngram>,
}

pub fn build_seed_profile(seed: &Monotext, config: &FdaConfig) -> Result<SeedProfile> {
    SeedProfile::build(seed, config)
}

impl SeedProfile {
    pub fn build(seed: &Monotext, config: &FdaConfig) -> Result<Self> {
        config.validate()?;
        let mut profile = SeedProfile {
            max_order: config.max_order,
            vocab: FxHashMap::default(),
            index: FxHashMap::default(),
            features: Vec::new(),
        };
        let mut ids = Vec::new();
        for sentence in seed.iter() {
            ids.clear();
            for token in sentence.tokens() {
                let next = profile.vocab.len() as u32;
                ids.push(*profile.vocab.entry(token.clone()).or_insert(next));
            }
            for n in 1..=config.max_order.min(ids.len()) {
                for (start, window) in ids.windows(n).enumerate() {
                    if !profile.index.contains_key(window) {
                        profile.index.insert(window.into(), profile.features.len() as u32);
                        profile
                            .features
                            .push(Ngram::new(sentence.tokens()[start..start + n].iter().cloned()));
                    }
                }
            }
        }
        if profile.features.is_empty() {
            return Err(Error::EmptyInput("FDA seed has no tokens"));
        }
        Ok(profile)
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of distinct features.
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> impl Iterator<Item = &Ngram> {
        self.features.iter()
    }

    pub fn contains(&self, ngram: &Ngram) -> bool {
        self.feature_id(&ngram.tokens).is_some()
    }

    fn feature_id(&self, tokens: &[String]) -> Option<u32> {
        if tokens.is_empty() || tokens.len() > self.max_order {
            return None;
        }
        let ids: Vec<u32> = tokens
            .iter()
            .map(|t| self.vocab.get(t.as_str()).copied())
            .collect::<Option<_>>()?;
        self.index.get(ids.as_slice()).copied()
    }

    /// Appends the feature id of every seed n-gram occurrence in `tokens`,
    /// order by order and left to right within an order.
    fn occurrences(&self, tokens: &[String], out: &mut Vec<u32>) {
        let ids: Vec<u32> = tokens
            .iter()
            .map(|t| self.vocab.get(t.as_str()).copied().unwrap_or(NO_TOKEN))
            .collect();
        for n in 1..=self.max_order.min(ids.len()) {
            for window in ids.windows(n) {
                if window.contains(&NO_TOKEN) {
                    continue;
                }
                if let Some(&f) = self.index.get(window) {
                    out.push(f);
                }
            }
        }
    }
}

/// The selected pool `L` and its feature counts `C_L`.
#[derive(Debug, Clone)]
pub struct SelectionState {
    selected: Vec<usize>,
    counts: Vec<u32>,
}

impl SelectionState {
    pub fn new(profile: &SeedProfile) -> Self {
        SelectionState {
            selected: Vec::new(),
            counts: vec![0; profile.len()],
        }
    }

    /// Candidate indices in selection order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// `C_L(g)`; zero for n-grams outside the profile.
    pub fn count(&self, profile: &SeedProfile, ngram: &Ngram) -> u32 {
        profile
            .feature_id(&ngram.tokens)
            .map_or(0, |f| self.counts[f as usize])
    }

    /// Non-zero feature counts.
    pub fn feature_counts<'p>(&self, profile: &'p SeedProfile) -> HashMap<&'p Ngram, u32> {
        profile
            .features
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(g, &c)| (g, c))
            .collect()
    }

    /// Adds a sentence to the pool, counting each of its feature occurrences.
    pub fn add(&mut self, profile: &SeedProfile, index: usize, sentence: &Sentence) {
        let mut occ = Vec::new();
        profile.occurrences(sentence.tokens(), &mut occ);
        self.add_occurrences(index, &occ);
    }

    fn add_occurrences(&mut self, index: usize, occurrences: &[u32]) {
        self.selected.push(index);
        for &f in occurrences {
            self.counts[f as usize] += 1;
        }
    }
}

fn decayed_score(occurrences: &[u32], counts: &[u32], decay_base: f64, length: usize) -> f64 {
    if length == 0 {
        return 0.0;
    }
    // fold from +0.0: an empty f64 sum is -0.0, which total_cmp ranks below 0.0
    let total = occurrences
        .iter()
        .fold(0.0, |acc, &f| acc + decay_base.powi(counts[f as usize] as i32));
    total / length as f64
}

pub fn score_sentence(
    sentence: &Sentence,
    profile: &SeedProfile,
    state: &SelectionState,
    config: &FdaConfig,
) -> f64 {
    let mut occ = Vec::new();
    profile.occurrences(sentence.tokens(), &mut occ);
    decayed_score(&occ, &state.counts, config.decay_base, sentence.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub requested: usize,
    pub available: usize,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub state: SelectionState,
    /// Set when fewer candidates existed than were requested; every candidate is then selected.
    pub truncated: Option<Truncation>,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    score: f64,
    index: u32,
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

/// Feature occurrences of every candidate, flattened.
struct CandidateFeatures {
    offsets: Vec<usize>,
    occurrences: Vec<u32>,
    lengths: Vec<u32>,
}

impl CandidateFeatures {
    fn build(candidates: &Monotext, profile: &SeedProfile) -> Self {
        const CHUNK: usize = 8192;
        let chunks: Vec<(Vec<u32>, Vec<u32>, Vec<u32>)> = candidates
            .sentences
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut occ = Vec::new();
                let mut counts = Vec::with_capacity(chunk.len());
                let mut lengths = Vec::with_capacity(chunk.len());
                for s in chunk {
                    let before = occ.len();
                    profile.occurrences(s.tokens(), &mut occ);
                    counts.push((occ.len() - before) as u32);
                    lengths.push(s.len() as u32);
                }
                (occ, counts, lengths)
            })
            .collect();

        let total = chunks.iter().map(|c| c.0.len()).sum();
        let mut offsets = Vec::with_capacity(candidates.len() + 1);
        let mut occurrences = Vec::with_capacity(total);
        let mut lengths = Vec::with_capacity(candidates.len());
        offsets.push(0);
        for (occ, counts, lens) in chunks {
            for c in counts {
                offsets.push(offsets.last().unwrap() + c as usize);
            }
            occurrences.extend(occ);
            lengths.extend(lens);
        }
        CandidateFeatures {
            offsets,
            occurrences,
            lengths,
        }
    }

    fn of(&self, index: usize) -> &[u32] {
        &self.occurrences[self.offsets[index]..self.offsets[index + 1]]
    }
}

/// Greedily selects `config.selection_size` candidates, best first.
///
/// Ties are broken towards the lower candidate index; zero-score candidates
/// are only taken once every positive-score candidate is exhausted.
pub fn select(candidates: &Monotext, profile: &SeedProfile, config: &FdaConfig) -> Result<Selection> {
    config.validate()?;
    if candidates.len() >= NO_TOKEN as usize {
        return Err(Error::InvalidConfig("candidate pool too large".into()));
    }
    let features = CandidateFeatures::build(candidates, profile);
    let mut state = SelectionState::new(profile);
    let base = config.decay_base;
    let score_of =
        |i: usize, counts: &[u32]| decayed_score(features.of(i), counts, base, features.lengths[i] as usize);

    let initial: Vec<HeapEntry> = (0..candidates.len())
        .into_par_iter()
        .map(|i| HeapEntry {
            score: score_of(i, &state.counts),
            index: i as u32,
        })
        .collect();
    let mut heap = BinaryHeap::from(initial);

    let target = config.selection_size.min(candidates.len());
    while state.selected.len() < target {
        let Some(top) = heap.pop() else { break };
        let refreshed = HeapEntry {
            score: score_of(top.index as usize, &state.counts),
            index: top.index,
        };
        if heap.peek().is_none_or(|next| refreshed >= *next) {
            let i = top.index as usize;
            state.add_occurrences(i, features.of(i));
        } else {
            heap.push(refreshed);
        }
    }

    let truncated = (config.selection_size > candidates.len()).then_some(Truncation {
        requested: config.selection_size,
        available: candidates.len(),
    });
    Ok(Selection {
        indices: state.selected.clone(),
        state,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenizerConfig;
    use proptest::prelude::*;

    fn mono(lines: &[&str]) -> Monotext {
        Monotext::from_lines(lines, &TokenizerConfig::default()).unwrap()
    }

    fn cfg(size: usize) -> FdaConfig {
        FdaConfig {
            selection_size: size,
            ..FdaConfig::default()
        }
    }

    #[test]
    fn seed_profile_features() {
        let p = build_seed_profile(&mono(&["the cat"]), &cfg(1)).unwrap();
        let mut f: Vec<_> = p.features().cloned().collect();
        f.sort();
        assert_eq!(
            f,
            vec![
                Ngram::new(["cat"]),
                Ngram::new(["the"]),
                Ngram::new(["the", "cat"])
            ]
        );
        let twice = build_seed_profile(&mono(&["the cat", "the cat"]), &cfg(1)).unwrap();
        assert_eq!(twice.len(), p.len());
        assert!(matches!(
            build_seed_profile(&mono(&[""]), &cfg(1)),
            Err(Error::EmptyInput(_))
        ));
        assert!(build_seed_profile(&Monotext::default(), &cfg(1)).is_err());
    }

    #[test]
    fn invalid_configs() {
        let seed = mono(&["a"]);
        for bad in [
            FdaConfig {
                max_order: 0,
                ..cfg(1)
            },
            FdaConfig {
                decay_base: 1.0,
                ..cfg(1)
            },
            FdaConfig {
                decay_base: 0.0,
                ..cfg(1)
            },
            cfg(0),
        ] {
            assert!(matches!(
                build_seed_profile(&seed, &bad),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn score_examples() {
        let c = cfg(1);
        let p = build_seed_profile(&mono(&["the cat"]), &c).unwrap();
        let s = Sentence::from_tokens(["the", "cat"]);
        let mut state = SelectionState::new(&p);
        assert_eq!(score_sentence(&s, &p, &state, &c), 1.5);
        state.add(&p, 0, &s);
        assert_eq!(state.count(&p, &Ngram::new(["the", "cat"])), 1);
        assert_eq!(score_sentence(&s, &p, &state, &c), 0.75);

        let unrelated = Sentence::from_tokens(["dog", "barks"]);
        assert_eq!(score_sentence(&unrelated, &p, &state, &c), 0.0);
        let empty = Sentence::from_tokens(Vec::<String>::new());
        assert_eq!(score_sentence(&empty, &p, &state, &c), 0.0);
    }

    #[test]
    fn repeated_ngrams_count_per_occurrence() {
        let c = cfg(1);
        let p = build_seed_profile(&mono(&["a"]), &c).unwrap();
        let s = Sentence::from_tokens(["a", "a", "b"]);
        let mut state = SelectionState::new(&p);
        assert_eq!(score_sentence(&s, &p, &state, &c), 2.0 / 3.0);
        state.add(&p, 0, &s);
        assert_eq!(state.count(&p, &Ngram::new(["a"])), 2);
        assert_eq!(score_sentence(&s, &p, &state, &c), 0.5 / 3.0);
    }

    #[test]
    fn select_follows_decay() {
        let seed = mono(&["a b", "c"]);
        let pool = mono(&["a b", "a b", "c", "x y z", ""]);
        let p = build_seed_profile(&seed, &cfg(5)).unwrap();
        let sel = select(&pool, &p, &cfg(5)).unwrap();
        // "a b" scores 1.5, then its duplicate 0.75 loses to "c" at 1.0
        assert_eq!(sel.indices, vec![0, 2, 1, 3, 4]);
        assert!(sel.truncated.is_none());
        assert_eq!(sel.state.selected(), sel.indices.as_slice());
        let counts = sel.state.feature_counts(&p);
        assert_eq!(counts[&Ngram::new(["a", "b"])], 2);
        assert_eq!(counts[&Ngram::new(["c"])], 1);
    }

    #[test]
    fn select_truncates() {
        let seed = mono(&["a"]);
        let pool = mono(&["b", "a"]);
        let p = build_seed_profile(&seed, &cfg(5)).unwrap();
        let sel = select(&pool, &p, &cfg(5)).unwrap();
        assert_eq!(sel.indices, vec![1, 0]);
        assert_eq!(
            sel.truncated,
            Some(Truncation {
                requested: 5,
                available: 2
            })
        );
    }

    #[test]
    fn self_seed_saturates() {
        let lines = ["the cat sat", "on the mat", "a dog", "cat dog mat"];
        let m = mono(&lines);
        let p = build_seed_profile(&m, &cfg(4)).unwrap();
        let sel = select(&m, &p, &cfg(4)).unwrap();
        let mut idx = sel.indices.clone();
        idx.sort();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    proptest! {
        #[test]
        fn score_is_monotone_and_bounded(
            seed in proptest::collection::vec(proptest::collection::vec(0u8..6, 1..8), 1..5),
            sentence in proptest::collection::vec(0u8..6, 0..10),
            bumps in proptest::collection::vec(proptest::collection::vec(0u8..6, 1..6), 0..6),
            max_order in 1usize..4,
        ) {
            let to_sentence = |v: &Vec<u8>| Sentence::from_tokens(v.iter().map(|t| format!("w{t}")));
            let c = FdaConfig { max_order, ..cfg(1) };
            let seed: Monotext = seed.iter().map(to_sentence).collect();
            let p = build_seed_profile(&seed, &c).unwrap();
            let s = to_sentence(&sentence);
            let mut state = SelectionState::new(&p);
            let mut prev = score_sentence(&s, &p, &state, &c);
            let occurrences: usize = (1..=max_order.min(s.len())).map(|n| s.len() - n + 1).sum();
            prop_assert!(prev >= 0.0);
            if !s.is_empty() {
                prop_assert!(prev <= occurrences as f64 / s.len() as f64);
                prop_assert!(prev <= max_order as f64);
            }
            for (i, b) in bumps.iter().enumerate() {
                state.add(&p, i, &to_sentence(b));
                let next = score_sentence(&s, &p, &state, &c);
                prop_assert!(next <= prev);
                prev = next;
            }
        }
    }
}
