use std::iter::Sum;
use std::ops::AddAssign;

use super::{ngram_counts, require_segments, EvalPair};
use crate::error::{Error, Result};

pub const CHRF_ORDER: usize = 6;

/// Character n-gram counts `(hyp, ref, matched)` per order 1..=6.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChrfStats {
    pub orders: [[u64; 3]; CHRF_ORDER],
}

impl ChrfStats {
    pub fn segment(pair: &EvalPair) -> Self {
        // tokens carry no whitespace, so concatenation strips it
        let hyp: Vec<char> = pair.hypothesis.tokens().iter().flat_map(|t| t.chars()).collect();
        let refr: Vec<char> = pair.reference.tokens().iter().flat_map(|t| t.chars()).collect();
        let mut stats = ChrfStats::default();
        for n in 1..=CHRF_ORDER {
            let hyp_counts = ngram_counts(&hyp, n);
            let ref_counts = ngram_counts(&refr, n);
            let matched: u64 = hyp_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)) as u64)
                .sum();
            stats.orders[n - 1] = [
                hyp.len().saturating_sub(n - 1) as u64,
                refr.len().saturating_sub(n - 1) as u64,
                matched,
            ];
        }
        stats
    }

    /// Precision and recall averaged over orders.
    ///
    /// Orders absent from both sides are skipped; an order present on only
    /// one side contributes zero to both averages.
    pub fn precision_recall(&self) -> (f64, f64) {
        let (mut p, mut r, mut effective) = (0.0, 0.0, 0usize);
        for &[hyp, refr, matched] in &self.orders {
            if hyp == 0 && refr == 0 {
                continue;
            }
            if hyp > 0 {
                p += matched as f64 / hyp as f64;
            }
            if refr > 0 {
                r += matched as f64 / refr as f64;
            }
            effective += 1;
        }
        if effective == 0 {
            return (0.0, 0.0);
        }
        (p / effective as f64, r / effective as f64)
    }

    /// F-beta of the averaged precision and recall, scaled to `[0, 100]`.
    pub fn score(&self, beta: f64) -> f64 {
        let (p, r) = self.precision_recall();
        let b2 = beta * beta;
        let denom = b2 * p + r;
        if denom == 0.0 {
            return 0.0;
        }
        100.0 * (1.0 + b2) * p * r / denom
    }
}

impl AddAssign for ChrfStats {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.orders.iter_mut().zip(rhs.orders) {
            for k in 0..3 {
                a[k] += b[k];
            }
        }
    }
}

impl Sum for ChrfStats {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ChrfStats::default(), |mut acc, s| {
            acc += s;
            acc
        })
    }
}

pub fn chrf(pairs: &[EvalPair], beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "chrF beta must be positive, got {beta}"
        )));
    }
    require_segments(pairs)?;
    Ok(pairs
        .iter()
        .map(ChrfStats::segment)
        .sum::<ChrfStats>()
        .score(beta))
}
