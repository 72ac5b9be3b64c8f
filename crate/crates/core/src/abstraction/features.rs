//! Clustering features: next-round equity histograms (preflop, flop, turn)
//! and scalar equity (river).
//!
//! Histograms are kept as raw per-bin sample counts; clustering works on the
//! cumulative form, where the L1 distance equals the earth mover's distance.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::canonical::{canonical_board, permute_card, preflop_class};
use super::equity::{equity, river_equities_into, EquityMode};
use crate::cards::{cards_mask, pair_cards, pair_index, Card, NUM_PAIRS};
use crate::error::Error;
use crate::game::Round;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HistogramPolicy {
    pub bins: usize,
    /// River cards sampled per turn card when building flop features; `None`
    /// enumerates all of them.
    pub rivers_per_turn: Option<usize>,
    /// Flops sampled per preflop class.
    pub preflop_flops: usize,
    pub seed: u64,
}

impl Default for HistogramPolicy {
    fn default() -> Self {
        HistogramPolicy { bins: 50, rivers_per_turn: None, preflop_flops: 64, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquityHistogram {
    pub bins: Vec<f64>,
}

impl EquityHistogram {
    pub fn from_values(values: &[f64], bins: usize) -> EquityHistogram {
        let mut h = vec![0.0; bins];
        for &v in values {
            h[bin_of(v, bins)] += 1.0;
        }
        let n = values.len().max(1) as f64;
        h.iter_mut().for_each(|x| *x /= n);
        EquityHistogram { bins: h }
    }

    pub fn mean(&self) -> f64 {
        let n = self.bins.len() as f64;
        self.bins.iter().enumerate().map(|(i, p)| p * (i as f64 + 0.5) / n).sum()
    }

    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.bins
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

#[inline]
pub fn bin_of(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

/// Earth mover's distance between two histograms over the same bins, in units of bins.
pub fn emd(a: &EquityHistogram, b: &EquityHistogram) -> f64 {
    let (mut ca, mut cb, mut d) = (0.0, 0.0, 0.0);
    for (x, y) in a.bins.iter().zip(&b.bins) {
        ca += x;
        cb += y;
        d += libm::fabs(ca - cb);
    }
    d
}

/// Features for every hole pair on one board, in the board's own labeling.
#[derive(Clone, Debug, PartialEq)]
pub struct BoardFeatures {
    /// Values per pair: `dim` numbers each (bin counts, or one equity on the river).
    pub values: Vec<f32>,
    pub dim: usize,
    pub live: Vec<bool>,
}

impl BoardFeatures {
    pub fn point(&self, pair: usize) -> &[f32] {
        &self.values[pair * self.dim..(pair + 1) * self.dim]
    }
}

/// Converts raw bin counts into a cumulative vector normalized to sum 1.
pub fn counts_to_cdf(counts: &[f32], out: &mut [f32]) {
    let n: f32 = counts.iter().sum();
    let mut acc = 0.0;
    for (o, c) in out.iter_mut().zip(counts) {
        acc += c;
        *o = if n > 0.0 { acc / n } else { 0.0 };
    }
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut h = crate::hash::Fnv64::new();
    h.write_u64(seed);
    h.write_u64(a);
    h.write_u64(b);
    h.finish()
}

/// Computes features for all pairs on `board` (3, 4 or 5 cards). The board
/// should be canonical when the policy samples rivers, so that results do not
/// depend on suit labels.
pub fn board_features(board: &[Card], policy: &HistogramPolicy) -> Result<BoardFeatures, Error> {
    let bm = cards_mask(board);
    let live: Vec<bool> = (0..NUM_PAIRS).map(|p| !super::equity::pair_blocked(p, bm)).collect();
    let rest: Vec<Card> = Card::all().filter(|c| bm & c.mask() == 0).collect();
    let mut eq = vec![0.0; NUM_PAIRS];
    match board.len() {
        5 => {
            river_equities_into(bm, &mut eq);
            let values = eq.iter().map(|&e| if e.is_nan() { 0.0 } else { e as f32 }).collect();
            Ok(BoardFeatures { values, dim: 1, live })
        }
        4 => {
            let bins = policy.bins;
            let mut values = vec![0.0f32; NUM_PAIRS * bins];
            for &r in &rest {
                river_equities_into(bm | r.mask(), &mut eq);
                for p in 0..NUM_PAIRS {
                    if live[p] && !eq[p].is_nan() {
                        values[p * bins + bin_of(eq[p], bins)] += 1.0;
                    }
                }
            }
            Ok(BoardFeatures { values, dim: bins, live })
        }
        3 => {
            let bins = policy.bins;
            let mut values = vec![0.0f32; NUM_PAIRS * bins];
            let mut turn_eq = vec![0.0; NUM_PAIRS];
            let mut turn_n = vec![0u32; NUM_PAIRS];
            for &t in &rest {
                turn_eq.iter_mut().for_each(|x| *x = 0.0);
                turn_n.iter_mut().for_each(|x| *x = 0);
                let mut rivers: Vec<Card> = rest.iter().copied().filter(|&c| c != t).collect();
                if let Some(k) = policy.rivers_per_turn {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix(policy.seed, bm, t.index() as u64));
                    rivers.shuffle(&mut rng);
                    rivers.truncate(k);
                }
                for &r in &rivers {
                    river_equities_into(bm | t.mask() | r.mask(), &mut eq);
                    for p in 0..NUM_PAIRS {
                        if !eq[p].is_nan() {
                            turn_eq[p] += eq[p];
                            turn_n[p] += 1;
                        }
                    }
                }
                for p in 0..NUM_PAIRS {
                    if live[p] && turn_n[p] > 0 && !super::equity::pair_blocked(p, t.mask()) {
                        values[p * bins + bin_of(turn_eq[p] / turn_n[p] as f64, bins)] += 1.0;
                    }
                }
            }
            Ok(BoardFeatures { values, dim: bins, live })
        }
        n => Err(Error::WrongCardCount { expected: 3, got: n }),
    }
}

/// Histogram of flop equities for a preflop holding over sampled flops.
pub fn preflop_histogram(holes: [Card; 2], policy: &HistogramPolicy) -> Result<EquityHistogram, Error> {
    let class = preflop_class(holes[0], holes[1]) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(policy.seed, class, 0));
    let hm = cards_mask(&holes);
    let mut deck: Vec<Card> = Card::all().filter(|c| hm & c.mask() == 0).collect();
    let mut values = Vec::with_capacity(policy.preflop_flops);
    for _ in 0..policy.preflop_flops {
        let (flop, _) = deck.partial_shuffle(&mut rng, 3);
        let flop: Vec<Card> = flop.to_vec();
        values.push(equity(holes, &flop, EquityMode::Exhaustive)?);
    }
    Ok(EquityHistogram::from_values(&values, policy.bins))
}

/// Next-round equity histogram of one holding. Rivers have no next round.
pub fn equity_histogram(holes: [Card; 2], board: &[Card], policy: &HistogramPolicy) -> Result<EquityHistogram, Error> {
    let mut all = Vec::from(board);
    all.extend_from_slice(&holes);
    crate::cards::check_distinct(&all)?;
    match Round::from_board_len(board.len()) {
        Some(Round::Preflop) => preflop_histogram(holes, policy),
        Some(Round::River) => Err(Error::RiverHistogram),
        Some(_) => {
            let (cmask, perm) = canonical_board(board);
            let cboard: Vec<Card> = Card::all().filter(|c| cmask & c.mask() != 0).collect();
            let f = board_features(&cboard, policy)?;
            let p = pair_index(permute_card(holes[0], perm), permute_card(holes[1], perm));
            let counts = f.point(p);
            let n: f32 = counts.iter().sum();
            Ok(EquityHistogram { bins: counts.iter().map(|&c| (c / n) as f64).collect() })
        }
        None => Err(Error::WrongCardCount { expected: 5, got: board.len() }),
    }
}

/// A representative holding for each preflop class.
pub fn preflop_representatives() -> Vec<[Card; 2]> {
    let mut reps: Vec<Option<[Card; 2]>> = vec![None; 169];
    for p in 0..NUM_PAIRS {
        let (a, b) = pair_cards(p);
        let c = preflop_class(a, b);
        if reps[c].is_none() {
            reps[c] = Some([a, b]);
        }
    }
    reps.into_iter().map(|r| r.expect("all classes occur")).collect()
}
