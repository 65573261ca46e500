//! Translation Edit Rate with greedy block shifts.
//!
//! Shift search follows tercom's heuristics: a shifted block must match the
//! reference exactly, is at most 10 words long, moves at most 50 positions,
//! and is only adopted when it lowers the edit distance. The edit distance
//! itself is a Levenshtein DP restricted to a beam around the length-scaled
//! diagonal.

use std::iter::Sum;
use std::ops::AddAssign;

use super::{require_segments, EvalPair};
use crate::error::{Error, Result};

const MAX_SHIFT_SIZE: usize = 10;
const MAX_SHIFT_DIST: usize = 50;
const BEAM_WIDTH: usize = 25;
const MAX_SHIFT_CANDIDATES: usize = 1000;
const INFINITY: u64 = 10_000_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Sub,
    Ins,
    Del,
    Undefined,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TerStats {
    pub edits: u64,
    pub ref_len: u64,
}

impl TerStats {
    pub fn score(&self) -> f64 {
        if self.ref_len > 0 {
            self.edits as f64 / self.ref_len as f64
        } else if self.edits > 0 {
            1.0
        } else {
            0.0
        }
    }
}

impl AddAssign for TerStats {
    fn add_assign(&mut self, rhs: Self) {
        self.edits += rhs.edits;
        self.ref_len += rhs.ref_len;
    }
}

impl Sum for TerStats {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(TerStats::default(), |mut acc, s| {
            acc += s;
            acc
        })
    }
}

/// Edit distance from `hyp` to `reference` and the operation trace (hyp rows, ref columns).
fn beam_edit_distance(hyp: &[&str], reference: &[&str]) -> (u64, Vec<Op>) {
    let (nh, nr) = (hyp.len(), reference.len());
    let mut dist = vec![vec![(INFINITY, Op::Undefined); nr + 1]; nh + 1];
    for (j, cell) in dist[0].iter_mut().enumerate() {
        *cell = (j as u64, Op::Ins);
    }
    let ratio = if nh > 0 { nr as f64 / nh as f64 } else { 1.0 };
    let beam = if (BEAM_WIDTH as f64) < ratio / 2.0 {
        (ratio / 2.0 + BEAM_WIDTH as f64).ceil() as i64
    } else {
        BEAM_WIDTH as i64
    };
    for i in 1..=nh {
        let diag = (i as f64 * ratio).floor() as i64;
        let lo = (diag - beam).max(0) as usize;
        let hi = if i == nh {
            nr + 1
        } else {
            (diag + beam).min(nr as i64 + 1).max(0) as usize
        };
        for j in lo..hi {
            if j == 0 {
                dist[i][0] = (dist[i - 1][0].0 + 1, Op::Del);
                continue;
            }
            let (sub_cost, sub_op) = if hyp[i - 1] == reference[j - 1] {
                (0, Op::Match)
            } else {
                (1, Op::Sub)
            };
            let options = [
                (dist[i - 1][j - 1].0 + sub_cost, sub_op),
                (dist[i - 1][j].0 + 1, Op::Del),
                (dist[i][j - 1].0 + 1, Op::Ins),
            ];
            for (cost, op) in options {
                if dist[i][j].0 > cost {
                    dist[i][j] = (cost, op);
                }
            }
        }
    }

    let mut trace = Vec::with_capacity(nh + nr);
    let (mut i, mut j) = (nh, nr);
    while i > 0 || j > 0 {
        let op = dist[i][j].1;
        trace.push(op);
        match op {
            Op::Match | Op::Sub => {
                i -= 1;
                j -= 1;
            }
            Op::Ins => j -= 1,
            Op::Del => i -= 1,
            Op::Undefined => unreachable!("trace entered an unreachable cell"),
        }
    }
    trace.reverse();
    (dist[nh][nr].0, trace)
}

struct Alignment {
    /// hypothesis position aligned to each reference position (-1 before the start)
    ref_to_hyp: Vec<i64>,
    ref_err: Vec<u8>,
    hyp_err: Vec<u8>,
}

/// Reads the trace as rewriting the reference into the hypothesis.
fn alignment(trace: &[Op], nr: usize) -> Alignment {
    let (mut pos_hyp, mut pos_ref) = (-1i64, -1i64);
    let mut out = Alignment {
        ref_to_hyp: vec![0; nr],
        ref_err: Vec::with_capacity(nr),
        hyp_err: Vec::new(),
    };
    for &op in trace {
        // insertions and deletions swap roles when reading the trace backwards
        match op {
            Op::Match | Op::Sub => {
                pos_hyp += 1;
                pos_ref += 1;
                out.ref_to_hyp[pos_ref as usize] = pos_hyp;
                let err = u8::from(op == Op::Sub);
                out.hyp_err.push(err);
                out.ref_err.push(err);
            }
            Op::Del => {
                pos_hyp += 1;
                out.hyp_err.push(1);
            }
            Op::Ins => {
                pos_ref += 1;
                out.ref_to_hyp[pos_ref as usize] = pos_hyp;
                out.ref_err.push(1);
            }
            Op::Undefined => unreachable!(),
        }
    }
    out
}

fn clamp_slice<'a, 'b>(v: &'b [&'a str], from: usize, to: usize) -> &'b [&'a str] {
    let to = to.min(v.len());
    &v[from.min(to)..to]
}

fn perform_shift<'a>(words: &[&'a str], start: usize, length: usize, target: usize) -> Vec<&'a str> {
    let block = clamp_slice(words, start, start + length);
    let parts: [&[&str]; 4] = if target < start {
        [
            clamp_slice(words, 0, target),
            block,
            clamp_slice(words, target, start),
            clamp_slice(words, start + length, words.len()),
        ]
    } else if target > start + length {
        [
            clamp_slice(words, 0, start),
            clamp_slice(words, start + length, target),
            block,
            clamp_slice(words, target, words.len()),
        ]
    } else {
        [
            clamp_slice(words, 0, start),
            clamp_slice(words, start + length, length + target),
            block,
            clamp_slice(words, length + target, words.len()),
        ]
    };
    parts.concat()
}

/// `(start_h, start_r, length)` for every exactly matching block.
fn shifted_pairs(hyp: &[&str], reference: &[&str]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for start_h in 0..hyp.len() {
        for start_r in 0..reference.len() {
            if start_r.abs_diff(start_h) > MAX_SHIFT_DIST {
                continue;
            }
            let mut length = 0;
            while hyp[start_h + length] == reference[start_r + length] && length < MAX_SHIFT_SIZE {
                length += 1;
                out.push((start_h, start_r, length));
                if start_h + length == hyp.len() || start_r + length == reference.len() {
                    break;
                }
            }
        }
    }
    out
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct ShiftRank {
    gain: i64,
    length: usize,
    neg_start: i64,
    neg_target: i64,
}

/// Best single shift: `(gain, shifted hypothesis)`.
fn best_shift<'a>(hyp: &[&'a str], reference: &[&str], checked: &mut usize) -> (i64, Vec<&'a str>) {
    let (pre_score, trace) = beam_edit_distance(hyp, reference);
    let align = alignment(&trace, reference.len());
    let mut best: Option<(ShiftRank, Vec<&'a str>)> = None;

    for (start_h, start_r, length) in shifted_pairs(hyp, reference) {
        if clamp_slice_u8(&align.hyp_err, start_h, start_h + length)
            .iter()
            .all(|&e| e == 0)
        {
            continue;
        }
        if clamp_slice_u8(&align.ref_err, start_r, start_r + length)
            .iter()
            .all(|&e| e == 0)
        {
            continue;
        }
        let aligned = align.ref_to_hyp[start_r];
        if start_h as i64 <= aligned && aligned < (start_h + length) as i64 {
            continue;
        }
        let mut prev_target = -1i64;
        for offset in -1..length as i64 {
            let r = start_r as i64 + offset;
            let target = if r == -1 {
                0
            } else if (r as usize) < reference.len() {
                align.ref_to_hyp[r as usize] + 1
            } else {
                break;
            };
            if target == prev_target {
                continue;
            }
            prev_target = target;
            let shifted = perform_shift(hyp, start_h, length, target as usize);
            let rank = ShiftRank {
                gain: pre_score as i64 - beam_edit_distance(&shifted, reference).0 as i64,
                length,
                neg_start: -(start_h as i64),
                neg_target: -target,
            };
            *checked += 1;
            if best.as_ref().is_none_or(|(b, _)| rank > *b) {
                best = Some((rank, shifted));
            }
        }
        if *checked >= MAX_SHIFT_CANDIDATES {
            break;
        }
    }
    match best {
        Some((rank, shifted)) => (rank.gain, shifted),
        None => (0, hyp.to_vec()),
    }
}

fn clamp_slice_u8(v: &[u8], from: usize, to: usize) -> &[u8] {
    let to = to.min(v.len());
    &v[from.min(to)..to]
}

/// Edits (including shifts) needed to turn `hyp` into `reference`.
pub fn ter_segment(hyp: &[String], reference: &[String]) -> TerStats {
    let reference: Vec<&str> = reference.iter().map(String::as_str).collect();
    let mut words: Vec<&str> = hyp.iter().map(String::as_str).collect();
    if reference.is_empty() {
        return TerStats {
            edits: words.len() as u64,
            ref_len: 0,
        };
    }
    let mut shifts = 0u64;
    let mut checked = 0usize;
    loop {
        let (gain, shifted) = best_shift(&words, &reference, &mut checked);
        if checked >= MAX_SHIFT_CANDIDATES || gain <= 0 {
            break;
        }
        shifts += 1;
        words = shifted;
    }
    let (distance, _) = beam_edit_distance(&words, &reference);
    TerStats {
        edits: shifts + distance,
        ref_len: reference.len() as u64,
    }
}

impl TerStats {
    pub fn segment(pair: &EvalPair) -> Self {
        ter_segment(pair.hypothesis.tokens(), pair.reference.tokens())
    }
}

/// Total edits over total reference words.
pub fn ter(pairs: &[EvalPair]) -> Result<f64> {
    require_segments(pairs)?;
    let stats: TerStats = pairs.iter().map(TerStats::segment).sum();
    if stats.ref_len == 0 {
        return Err(Error::EmptyInput("TER reference corpus has no words"));
    }
    Ok(stats.score())
}

/// Plain Levenshtein distance on words, no beam.
#[cfg(test)]
pub(crate) fn levenshtein(a: &[&str], b: &[&str]) -> u64 {
    let mut prev: Vec<u64> = (0..=b.len() as u64).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i as u64 + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + u64::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}
