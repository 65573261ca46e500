use serde::{Deserialize, Serialize};

use super::translate::translate;
use super::TranslatorSpec;
use crate::corpus::{Bitext, Origin, SentencePair, TokenizerConfig};
use crate::error::{Error, Result};

/// Keeps pairs whose source/target token-length ratio lies strictly inside `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioFilterConfig {
    pub lower: f64,
    pub upper: f64,
}

impl Default for RatioFilterConfig {
    fn default() -> Self {
        RatioFilterConfig {
            lower: 0.5,
            upper: 1.5,
        }
    }
}

impl RatioFilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lower > 0.0 && self.lower < self.upper {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "ratio bounds must satisfy 0 < lower < upper, got {} and {}",
                self.lower, self.upper
            )))
        }
    }

    pub fn keeps(&self, pair: &SentencePair) -> bool {
        if pair.target.is_empty() {
            return false;
        }
        let ratio = pair.source.len() as f64 / pair.target.len() as f64;
        self.lower < ratio && ratio < self.upper
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FilterStats {
    pub input: usize,
    pub kept: usize,
    pub removed: usize,
    /// removed pairs whose target side had no tokens
    pub empty_target: usize,
}

pub fn ratio_filter(bitext: &Bitext, config: &RatioFilterConfig) -> Result<(Bitext, FilterStats)> {
    config.validate()?;
    let kept: Vec<SentencePair> = bitext.pairs.iter().filter(|p| config.keeps(p)).cloned().collect();
    let stats = FilterStats {
        input: bitext.len(),
        kept: kept.len(),
        removed: bitext.len() - kept.len(),
        empty_target: bitext.pairs.iter().filter(|p| p.target.is_empty()).count(),
    };
    Ok((Bitext::new(kept), stats))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HybridBuildReport {
    pub authentic_in: usize,
    pub synthetic_in: usize,
    pub authentic_removed: usize,
    pub synthetic_removed: usize,
    pub total_out: usize,
}

/// Back-translates the target side of `authentic` and concatenates the
/// separately filtered authentic and synthetic sets, authentic first.
///
/// Target sentences therefore appear twice in the output.
pub fn build_hybrid(
    authentic: &Bitext,
    back_translator: &TranslatorSpec,
    filter: &RatioFilterConfig,
    config: &TokenizerConfig,
) -> Result<(Bitext, HybridBuildReport)> {
    if authentic.is_empty() {
        return Err(Error::EmptyInput("authentic bitext has no pairs"));
    }
    filter.validate()?;
    let targets = authentic.targets();
    let back = translate(&targets, back_translator, config)?;
    let synthetic = Bitext::zip(back, targets, Origin::Synthetic)?;

    let (auth_kept, auth_stats) = ratio_filter(authentic, filter)?;
    let (syn_kept, syn_stats) = ratio_filter(&synthetic, filter)?;
    let mut pairs = auth_kept.pairs;
    pairs.extend(syn_kept.pairs);
    let report = HybridBuildReport {
        authentic_in: auth_stats.input,
        synthetic_in: syn_stats.input,
        authentic_removed: auth_stats.removed,
        synthetic_removed: syn_stats.removed,
        total_out: pairs.len(),
    };
    Ok((Bitext::new(pairs), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;
    use proptest::prelude::*;

    fn pair(src_len: usize, tgt_len: usize) -> SentencePair {
        let s = Sentence::from_tokens((0..src_len).map(|i| format!("s{i}")));
        let t = Sentence::from_tokens((0..tgt_len).map(|i| format!("t{i}")));
        SentencePair::new(s, t, Origin::Authentic)
    }

    #[test]
    fn ratio_examples() {
        let f = RatioFilterConfig::default();
        assert!(f.keeps(&pair(10, 10)));
        assert!(!f.keeps(&pair(9, 20)));
        assert!(!f.keeps(&pair(3, 2)));
        assert!(!f.keeps(&pair(1, 2)));
        assert!(!f.keeps(&pair(0, 0)));
        assert!(!f.keeps(&pair(1, 0)));
        assert!(f.keeps(&pair(7, 5)));
    }

    #[test]
    fn invalid_bounds() {
        for (lower, upper) in [(0.0, 1.0), (1.5, 0.5), (1.0, 1.0)] {
            assert!(RatioFilterConfig { lower, upper }.validate().is_err());
        }
    }

    #[test]
    fn stats_count_removals() {
        let bt = Bitext::new(vec![pair(10, 10), pair(9, 20), pair(2, 0), pair(4, 5)]);
        let (kept, stats) = ratio_filter(&bt, &RatioFilterConfig::default()).unwrap();
        assert_eq!(kept.pairs, vec![pair(10, 10), pair(4, 5)]);
        assert_eq!(
            stats,
            FilterStats {
                input: 4,
                kept: 2,
                removed: 2,
                empty_target: 1
            }
        );
    }

    #[test]
    fn hybrid_doubles_in_bounds_corpus() {
        let bt = Bitext::new((1..=100).map(|n| pair(n % 7 + 3, n % 7 + 3)).collect());
        let (out, report) = build_hybrid(
            &bt,
            &TranslatorSpec::IdentityMock,
            &RatioFilterConfig::default(),
            &TokenizerConfig::default(),
        )
        .unwrap();
        assert_eq!(out.len(), 200);
        assert_eq!(report.total_out, 200);
        assert_eq!(
            out.pairs
                .iter()
                .filter(|p| p.origin() == Origin::Synthetic)
                .count(),
            100
        );
        assert!(out.pairs[..100].iter().all(|p| p.origin() == Origin::Authentic));
        for (a, s) in out.pairs[..100].iter().zip(&out.pairs[100..]) {
            assert_eq!(a.target, s.target);
        }
    }

    #[test]
    fn hybrid_rejects_empty() {
        assert!(build_hybrid(
            &Bitext::default(),
            &TranslatorSpec::IdentityMock,
            &RatioFilterConfig::default(),
            &TokenizerConfig::default()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn filter_is_idempotent_subsequence(lens in proptest::collection::vec((0usize..12, 0usize..12), 0..40)) {
            let bt = Bitext::new(lens.iter().map(|&(s, t)| pair(s, t)).collect());
            let f = RatioFilterConfig::default();
            let (once, stats) = ratio_filter(&bt, &f).unwrap();
            let (twice, _) = ratio_filter(&once, &f).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(stats.kept + stats.removed, stats.input);
            // order-preserving subsequence
            let mut it = bt.pairs.iter();
            for p in &once.pairs {
                prop_assert!(it.any(|q| q == p));
            }
        }
    }
}
