use rustc_hash::FxHashMap;

use super::{ngram_counts, require_segments, EvalPair};
use crate::error::Result;

const MAX_ORDER: usize = 5;

/// Brevity exponent chosen so the penalty is 0.5 at a length ratio of 2/3.
fn brevity_penalty(hyp_len: u64, ref_len: u64) -> f64 {
    if ref_len == 0 || hyp_len >= ref_len {
        return 1.0;
    }
    if hyp_len == 0 {
        return 0.0;
    }
    let beta = 0.5f64.ln() / (2.0f64 / 3.0).ln().powi(2);
    let ratio = hyp_len as f64 / ref_len as f64;
    (beta * ratio.ln().powi(2)).exp()
}

/// Information-weighted n-gram co-occurrence score for orders 1..=5.
///
/// The information of `w1..wn` is `log2(count(w1..wn-1) / count(w1..wn))`
/// over the reference corpus, with the total reference word count standing
/// in for the empty prefix.
pub fn nist(pairs: &[EvalPair]) -> Result<f64> {
    require_segments(pairs)?;
    Ok(nist_of(pairs.iter()))
}

pub(crate) fn nist_of<'a>(pairs: impl Iterator<Item = &'a EvalPair> + Clone) -> f64 {
    let mut ref_counts: FxHashMap<&[String], u64> = FxHashMap::default();
    let mut ref_words = 0u64;
    let mut hyp_words = 0u64;
    for p in pairs.clone() {
        let r = p.reference.tokens();
        ref_words += r.len() as u64;
        hyp_words += p.hypothesis.len() as u64;
        for n in 1..=MAX_ORDER {
            for (g, c) in ngram_counts(r, n) {
                *ref_counts.entry(g).or_insert(0) += c as u64;
            }
        }
    }
    let info = |g: &[String]| -> f64 {
        let count = ref_counts[g] as f64;
        let prefix = if g.len() == 1 {
            ref_words as f64
        } else {
            ref_counts[&g[..g.len() - 1]] as f64
        };
        (prefix / count).log2()
    };

    let mut info_sum = [0.0f64; MAX_ORDER];
    let mut hyp_total = [0u64; MAX_ORDER];
    for p in pairs {
        let h = p.hypothesis.tokens();
        let r = p.reference.tokens();
        for n in 1..=MAX_ORDER {
            hyp_total[n - 1] += h.len().saturating_sub(n - 1) as u64;
            let seg_ref = ngram_counts(r, n);
            // sorted for a summation order independent of hashing
            let mut matched: Vec<(&[String], u32)> = ngram_counts(h, n)
                .into_iter()
                .filter_map(|(g, c)| seg_ref.get(g).map(|&rc| (g, c.min(rc))))
                .collect();
            matched.sort_unstable();
            info_sum[n - 1] += matched.iter().map(|&(g, c)| c as f64 * info(g)).sum::<f64>();
        }
    }
    let score: f64 = info_sum
        .iter()
        .zip(&hyp_total)
        .filter(|(_, &t)| t > 0)
        .map(|(&s, &t)| s / t as f64)
        .sum();
    score * brevity_penalty(hyp_words, ref_words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tests::pairs;

    #[test]
    fn single_segment_identity() {
        // unigram info log2(4/1) = 2 for each of 4 words; higher orders carry no information
        let p = pairs(&[("a b c d", "a b c d")]);
        assert!((nist(&p).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_overlap() {
        let p = pairs(&[("x y", "a b c")]);
        assert_eq!(nist(&p).unwrap(), 0.0);
    }

    #[test]
    fn repeated_corpus_is_invariant() {
        let base = [("a b c d e", "a b x d e"), ("f g a b", "f g h a b c")];
        let doubled: Vec<_> = base.iter().chain(base.iter()).copied().collect();
        let a = nist(&pairs(&base)).unwrap();
        let b = nist(&pairs(&doubled)).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn brevity_calibration() {
        assert!((brevity_penalty(2, 3) - 0.5).abs() < 1e-12);
        assert_eq!(brevity_penalty(3, 3), 1.0);
        assert_eq!(brevity_penalty(0, 3), 0.0);
    }

    #[test]
    fn hand_computed_with_repeats() {
        // ref "a a b": info(a)=log2(3/2), info(b)=log2(3), info(a a)=log2(2/1), info(a b)=log2(2/1), info(a a b)=0
        // hyp "a b": unigram matches a,b; bigram match "a b"; c/r = 2/3 => BP 0.5
        let p = pairs(&[("a b", "a a b")]);
        let uni = ((1.5f64).log2() + 3f64.log2()) / 2.0;
        let bi = 1.0;
        assert!((nist(&p).unwrap() - 0.5 * (uni + bi)).abs() < 1e-12);
    }
}
