//! Synthetic corpora for the benchmarks.

use adaptmt::{Monotext, TokenizerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lines of `8..=22` tokens drawn log-uniformly from `vocab` word types.
pub fn zipf_lines(n: usize, vocab: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = vocab as f64;
    (0..n)
        .map(|_| {
            let len = rng.random_range(8..=22);
            (0..len)
                .map(|_| format!("w{}", v.powf(rng.random::<f64>()) as u64 - 1))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn zipf_corpus(n: usize, vocab: usize, seed: u64) -> Monotext {
    Monotext::from_lines(zipf_lines(n, vocab, seed), &TokenizerConfig::default())
        .expect("synthetic text is valid")
}

/// Copies of `lines` with roughly `rate` of the tokens replaced, as a stand-in system output.
pub fn perturb(lines: &[String], rate: f64, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lines
        .iter()
        .map(|l| {
            l.split(' ')
                .map(|t| if rng.random_bool(rate) { "unk" } else { t })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}
