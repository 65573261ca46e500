//! Brute-force reference implementations used to cross-check the optimized code.
//!
//! Deliberately naive: string-keyed maps, a full rescan of every remaining
//! candidate after each pick. Summation order (order by order, left to right,
//! starting from +0.0) matches the library so that scores tie bit-for-bit.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

pub fn ngrams(tokens: &[String], max_order: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for n in 1..=max_order.min(tokens.len()) {
        for w in tokens.windows(n) {
            out.push(w.to_vec());
        }
    }
    out
}

pub fn fda_score(
    tokens: &[String],
    seed: &HashSet<Vec<String>>,
    counts: &HashMap<Vec<String>, u32>,
    max_order: usize,
    decay_base: f64,
) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for g in ngrams(tokens, max_order) {
        if seed.contains(&g) {
            total += decay_base.powi(*counts.get(&g).unwrap_or(&0) as i32);
        }
    }
    total / tokens.len() as f64
}

/// Greedy FDA with a full rescan per step; ties go to the lowest index.
pub fn fda_select(
    pool: &[Vec<String>],
    seed_sentences: &[Vec<String>],
    max_order: usize,
    decay_base: f64,
    size: usize,
) -> Vec<usize> {
    let seed: HashSet<Vec<String>> = seed_sentences.iter().flat_map(|s| ngrams(s, max_order)).collect();
    // seed n-gram occurrences of each candidate, in enumeration order
    let occurrences: Vec<Vec<Vec<String>>> = pool
        .iter()
        .map(|s| {
            ngrams(s, max_order)
                .into_iter()
                .filter(|g| seed.contains(g))
                .collect()
        })
        .collect();
    let mut counts: HashMap<Vec<String>, u32> = HashMap::new();
    let mut taken = vec![false; pool.len()];
    let mut order = Vec::new();
    while order.len() < size.min(pool.len()) {
        let mut best: Option<(usize, f64)> = None;
        for (i, occ) in occurrences.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let score = if pool[i].is_empty() {
                0.0
            } else {
                let mut total = 0.0;
                for g in occ {
                    total += decay_base.powi(*counts.get(g).unwrap_or(&0) as i32);
                }
                total / pool[i].len() as f64
            };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        let (i, _) = best.unwrap();
        taken[i] = true;
        order.push(i);
        for g in &occurrences[i] {
            *counts.entry(g.clone()).or_insert(0) += 1;
        }
    }
    order
}

pub fn split(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_owned).collect()
}
