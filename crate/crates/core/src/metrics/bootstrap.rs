//! Paired bootstrap resampling.
//!
//! Each resample draws segment indices with replacement and rescores both
//! systems on the same draw. The p-value is the fraction of resamples in
//! which the system does not keep the direction of its full-corpus
//! difference over the baseline. A zero observed difference has no
//! direction to keep, so every resample counts against it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bleu::BleuStats;
use super::chrf::ChrfStats;
use super::nist::nist_of;
use super::ter::TerStats;
use super::{require_segments, EvalPair, Metric};
use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_BOOTSTRAP_SEED: u64 = 12_345;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignificanceResult {
    pub metric: Metric,
    pub baseline_score: f64,
    pub system_score: f64,
    /// system minus baseline
    pub delta: f64,
    pub p_value: f64,
    pub resamples: usize,
    /// resamples that failed to preserve the observed direction
    pub failures: usize,
}

enum SegmentStats {
    Bleu(Vec<BleuStats>),
    Chrf(Vec<ChrfStats>, f64),
    Ter(Vec<TerStats>),
    Nist,
}

impl SegmentStats {
    fn new(metric: Metric, pairs: &[EvalPair]) -> Self {
        match metric {
            Metric::Bleu => SegmentStats::Bleu(pairs.par_iter().map(BleuStats::segment).collect()),
            Metric::Chrf3 => SegmentStats::Chrf(pairs.par_iter().map(ChrfStats::segment).collect(), 3.0),
            Metric::Chrf1 => SegmentStats::Chrf(pairs.par_iter().map(ChrfStats::segment).collect(), 1.0),
            Metric::Ter => SegmentStats::Ter(pairs.par_iter().map(TerStats::segment).collect()),
            Metric::Nist => SegmentStats::Nist,
        }
    }

    fn score(&self, pairs: &[EvalPair], indices: &[usize]) -> f64 {
        match self {
            SegmentStats::Bleu(s) => indices.iter().map(|&i| s[i]).sum::<BleuStats>().score(),
            SegmentStats::Chrf(s, beta) => indices.iter().map(|&i| s[i]).sum::<ChrfStats>().score(*beta),
            SegmentStats::Ter(s) => indices.iter().map(|&i| s[i]).sum::<TerStats>().score(),
            // reference n-gram information depends on the resampled reference corpus
            SegmentStats::Nist => nist_of(indices.iter().map(|&i| &pairs[i])),
        }
    }
}

pub fn bootstrap_significance(
    baseline: &[EvalPair],
    system: &[EvalPair],
    metric: Metric,
    resamples: usize,
    rng_seed: u64,
) -> Result<SignificanceResult> {
    if baseline.len() != system.len() {
        return Err(Error::Alignment {
            left: baseline.len(),
            right: system.len(),
        });
    }
    require_segments(baseline)?;
    if resamples == 0 {
        return Err(Error::InvalidConfig("at least one resample is required".into()));
    }
    let baseline_score = metric.compute(baseline)?;
    let system_score = metric.compute(system)?;
    let delta = system_score - baseline_score;

    let base_stats = SegmentStats::new(metric, baseline);
    let sys_stats = SegmentStats::new(metric, system);
    let n = baseline.len();

    // one ChaCha stream per resample keeps results independent of scheduling
    let failures = (0..resamples)
        .into_par_iter()
        .filter(|&r| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(r as u64);
            let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let d = sys_stats.score(system, &indices) - base_stats.score(baseline, &indices);
            if delta > 0.0 {
                d <= 0.0
            } else if delta < 0.0 {
                d >= 0.0
            } else {
                true
            }
        })
        .count();

    Ok(SignificanceResult {
        metric,
        baseline_score,
        system_score,
        delta,
        p_value: failures as f64 / resamples as f64,
        resamples,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tests::pairs;

    fn corpus() -> (Vec<EvalPair>, Vec<EvalPair>) {
        let refs = [
            "the cat sat on the mat",
            "a dog barked at the moon",
            "we went to the market today",
            "she reads a book every night",
            "the train leaves at noon",
        ];
        let base: Vec<(&str, &str)> = refs.iter().map(|r| ("zz yy xx ww", *r)).collect();
        let sys: Vec<(&str, &str)> = refs.iter().map(|r| (*r, *r)).collect();
        (pairs(&base), pairs(&sys))
    }

    #[test]
    fn identical_systems() {
        let (base, _) = corpus();
        for m in Metric::ALL {
            let r = bootstrap_significance(&base, &base, m, 200, 7).unwrap();
            assert_eq!(r.delta, 0.0);
            assert_eq!(r.p_value, 1.0, "{m}");
        }
    }

    #[test]
    fn dominant_system() {
        let (base, sys) = corpus();
        for m in Metric::ALL {
            let r = bootstrap_significance(&base, &sys, m, 200, 7).unwrap();
            assert_eq!(r.p_value, 0.0, "{m}");
            assert_eq!(r.delta > 0.0, m.higher_is_better(), "{m}");
        }
    }

    #[test]
    fn seeded_and_proportional() {
        let (base, _) = corpus();
        let mixed = pairs(&[
            ("the cat sat on a mat", "the cat sat on the mat"),
            ("zz yy", "a dog barked at the moon"),
            ("we went to the market today", "we went to the market today"),
            ("she read a book each night", "she reads a book every night"),
            ("the train leave at noon", "the train leaves at noon"),
        ]);
        let a = bootstrap_significance(&base, &mixed, Metric::Chrf3, 333, 99).unwrap();
        let b = bootstrap_significance(&base, &mixed, Metric::Chrf3, 333, 99).unwrap();
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
        assert_eq!(a.p_value * 333.0, a.failures as f64);
    }

    #[test]
    fn rejects_misaligned() {
        let (base, sys) = corpus();
        assert!(matches!(
            bootstrap_significance(&base, &sys[..3], Metric::Bleu, 10, 1),
            Err(Error::Alignment { left: 5, right: 3 })
        ));
        assert!(bootstrap_significance(&base, &sys, Metric::Bleu, 0, 1).is_err());
    }
}
