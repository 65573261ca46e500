use std::iter::Sum;
use std::ops::AddAssign;

use super::{ngram_counts, require_segments, EvalPair};
use crate::error::Result;

const MAX_ORDER: usize = 4;

/// Clipped n-gram matches and totals for orders 1..=4, plus lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn segment(pair: &EvalPair) -> Self {
        let hyp = pair.hypothesis.tokens();
        let refr = pair.reference.tokens();
        let mut stats = BleuStats {
            hyp_len: hyp.len() as u64,
            ref_len: refr.len() as u64,
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let ref_counts = ngram_counts(refr, n);
            let hyp_counts = ngram_counts(hyp, n);
            stats.matches[n - 1] = hyp_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)) as u64)
                .sum();
            stats.totals[n - 1] = hyp.len().saturating_sub(n - 1) as u64;
        }
        stats
    }

    /// Geometric mean of clipped precisions times brevity penalty; 0 if any precision is 0.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.contains(&0) {
            return 0.0;
        }
        let log_precision: f64 = self
            .matches
            .iter()
            .zip(&self.totals)
            .map(|(&m, &t)| (m as f64 / t as f64).ln())
            .sum::<f64>()
            / MAX_ORDER as f64;
        let brevity = if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        };
        brevity * log_precision.exp()
    }
}

impl AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: Self) {
        for n in 0..MAX_ORDER {
            self.matches[n] += rhs.matches[n];
            self.totals[n] += rhs.totals[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl Sum for BleuStats {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(BleuStats::default(), |mut acc, s| {
            acc += s;
            acc
        })
    }
}

/// Corpus BLEU in `[0, 1]`, without smoothing.
pub fn bleu(pairs: &[EvalPair]) -> Result<f64> {
    require_segments(pairs)?;
    Ok(pairs.iter().map(BleuStats::segment).sum::<BleuStats>().score())
}
