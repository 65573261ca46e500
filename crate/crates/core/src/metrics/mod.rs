//! Corpus-level MT evaluation against a single reference.
//!
//! Every metric is computed from summed per-segment statistics (NIST also
//! needs corpus-wide reference n-gram counts), which makes scores invariant
//! under consistent reordering of segments and lets bootstrap resampling
//! re-aggregate without re-tokenizing.

mod bleu;
mod bootstrap;
mod chrf;
mod nist;
mod ter;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{Monotext, Sentence};
use crate::error::{Error, Result};

pub use bleu::{bleu, BleuStats};
pub use bootstrap::{bootstrap_significance, SignificanceResult, DEFAULT_BOOTSTRAP_SEED, DEFAULT_RESAMPLES};
pub use chrf::{chrf, ChrfStats, CHRF_ORDER};
pub use nist::nist;
pub use ter::{ter, ter_segment, TerStats};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub hypothesis: Sentence,
    pub reference: Sentence,
}

impl EvalPair {
    pub fn new(hypothesis: Sentence, reference: Sentence) -> Self {
        EvalPair {
            hypothesis,
            reference,
        }
    }
}

/// Aligns hypothesis and reference segments by index.
pub fn align(hypotheses: Monotext, references: Monotext) -> Result<Vec<EvalPair>> {
    if hypotheses.len() != references.len() {
        return Err(Error::Alignment {
            left: hypotheses.len(),
            right: references.len(),
        });
    }
    Ok(hypotheses
        .sentences
        .into_iter()
        .zip(references.sentences)
        .map(|(h, r)| EvalPair::new(h, r))
        .collect())
}

pub(crate) fn require_segments(pairs: &[EvalPair]) -> Result<()> {
    if pairs.is_empty() {
        Err(Error::EmptyInput("evaluation corpus has no segments"))
    } else {
        Ok(())
    }
}

pub(crate) fn ngram_counts<T: Eq + std::hash::Hash>(items: &[T], n: usize) -> FxHashMap<&[T], u32> {
    let mut counts = FxHashMap::default();
    if n > 0 {
        for w in items.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Bleu,
    Nist,
    Ter,
    Chrf3,
    Chrf1,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Bleu,
        Metric::Nist,
        Metric::Ter,
        Metric::Chrf3,
        Metric::Chrf1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Bleu => "bleu",
            Metric::Nist => "nist",
            Metric::Ter => "ter",
            Metric::Chrf3 => "chrf3",
            Metric::Chrf1 => "chrf1",
        }
    }

    /// TER is an error rate; every other metric rewards higher values.
    pub fn higher_is_better(self) -> bool {
        self != Metric::Ter
    }

    pub fn compute(self, pairs: &[EvalPair]) -> Result<f64> {
        match self {
            Metric::Bleu => bleu(pairs),
            Metric::Nist => nist(pairs),
            Metric::Ter => ter(pairs),
            Metric::Chrf3 => chrf(pairs, 3.0),
            Metric::Chrf1 => chrf(pairs, 1.0),
        }
    }

    /// Formats a score with the precision used in reports.
    pub fn format(self, score: f64) -> String {
        match self {
            Metric::Chrf3 | Metric::Chrf1 => format!("{score:.2}"),
            _ => format!("{score:.4}"),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub bleu: f64,
    pub nist: f64,
    pub ter: f64,
    pub chrf3: f64,
    pub chrf1: f64,
    pub segment_count: usize,
}

impl EvalReport {
    pub fn score(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Bleu => self.bleu,
            Metric::Nist => self.nist,
            Metric::Ter => self.ter,
            Metric::Chrf3 => self.chrf3,
            Metric::Chrf1 => self.chrf1,
        }
    }

    /// `metric=value` lines.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        for m in Metric::ALL {
            writeln!(out, "{}={}", m.name(), m.format(self.score(m))).unwrap();
        }
        writeln!(out, "segments={}", self.segment_count).unwrap();
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<8} {:>10}", "metric", "score").unwrap();
        for m in Metric::ALL {
            writeln!(
                out,
                "{:<8} {:>10}",
                m.name().to_uppercase(),
                m.format(self.score(m))
            )
            .unwrap();
        }
        writeln!(out, "{:<8} {:>10}", "segments", self.segment_count).unwrap();
        out
    }
}

pub fn evaluate(pairs: &[EvalPair]) -> Result<EvalReport> {
    require_segments(pairs)?;
    let chrf_stats: ChrfStats = pairs.iter().map(ChrfStats::segment).sum();
    Ok(EvalReport {
        bleu: bleu(pairs)?,
        nist: nist(pairs)?,
        ter: ter(pairs)?,
        chrf3: chrf_stats.score(3.0),
        chrf1: chrf_stats.score(1.0),
        segment_count: pairs.len(),
    })
}
