mod support;

use adaptmt::fda::{build_seed_profile, select, FdaConfig};
use adaptmt::{Monotext, Sentence};
use proptest::prelude::*;
use support::oracle;

fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    let token = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]).prop_map(str::to_owned);
    prop::collection::vec(prop::collection::vec(token, 0..8), 1..30)
}

fn mono(sentences: &[Vec<String>]) -> Monotext {
    sentences
        .iter()
        .map(|s| Sentence::from_tokens(s.iter().cloned()))
        .collect()
}

proptest! {
    #[test]
    fn lazy_selection_matches_rescan(
        pool in corpus(),
        seed in corpus(),
        size in 1usize..40,
        order in 1usize..4,
    ) {
        prop_assume!(seed.iter().any(|s| !s.is_empty()));
        let config = FdaConfig { max_order: order, decay_base: 0.5, selection_size: size };
        let profile = build_seed_profile(&mono(&seed), &config).unwrap();
        let got = select(&mono(&pool), &profile, &config).unwrap().indices;
        prop_assert_eq!(got, oracle::fda_select(&pool, &seed, order, 0.5, size));
    }
}

#[test]
fn other_decay_bases() {
    let pool: Vec<_> = ["a b c", "a a a", "b c", "c", "d e", "a b", "e"]
        .iter()
        .map(|l| oracle::split(l))
        .collect();
    let seed = vec![oracle::split("a b c e")];
    for base in [0.1, 0.25, 0.9] {
        let config = FdaConfig {
            max_order: 2,
            decay_base: base,
            selection_size: 7,
        };
        let profile = build_seed_profile(&mono(&seed), &config).unwrap();
        let got = select(&mono(&pool), &profile, &config).unwrap().indices;
        assert_eq!(got, oracle::fda_select(&pool, &seed, 2, base, 7), "base {base}");
    }
}
