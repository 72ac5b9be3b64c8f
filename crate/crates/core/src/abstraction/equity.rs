//! Hand equity against a uniformly random opponent holding.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cards::{cards_mask, check_distinct, pair_cards, pair_index, Card, NUM_PAIRS};
use crate::error::Error;
use crate::eval::eval_mask;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquityMode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

fn remaining(dead: u64) -> Vec<Card> {
    Card::all().filter(|c| dead & c.mask() == 0).collect()
}

fn for_each_combo(cards: &[Card], k: usize, f: &mut impl FnMut(u64)) {
    fn rec(cards: &[Card], k: usize, start: usize, acc: u64, f: &mut impl FnMut(u64)) {
        if k == 0 {
            f(acc);
            return;
        }
        for i in start..=cards.len() - k {
            rec(cards, k - 1, i + 1, acc | cards[i].mask(), f);
        }
    }
    if k <= cards.len() {
        rec(cards, k, 0, 0, f);
    }
}

fn score(a: u32, b: u32) -> f64 {
    match a.cmp(&b) {
        core::cmp::Ordering::Greater => 1.0,
        core::cmp::Ordering::Equal => 0.5,
        core::cmp::Ordering::Less => 0.0,
    }
}

/// Exact equity of `holes` against one specific opposing holding.
pub fn equity_vs(holes: [Card; 2], opp: [Card; 2], board: &[Card]) -> Result<f64, Error> {
    let mut all = Vec::from(board);
    all.extend_from_slice(&holes);
    all.extend_from_slice(&opp);
    check_distinct(&all)?;
    let dead = cards_mask(&all);
    let hm = cards_mask(&holes);
    let om = cards_mask(&opp);
    let bm = cards_mask(board);
    let rest = remaining(dead);
    let (mut total, mut n) = (0.0, 0u64);
    for_each_combo(&rest, 5 - board.len(), &mut |runout| {
        let b = bm | runout;
        total += score(eval_mask(b | hm).0, eval_mask(b | om).0);
        n += 1;
    });
    Ok(total / n as f64)
}

/// Win probability plus half the tie probability against a uniformly random
/// opposing holding, over uniformly random board completions.
pub fn equity(holes: [Card; 2], board: &[Card], mode: EquityMode) -> Result<f64, Error> {
    let mut all = Vec::from(board);
    all.extend_from_slice(&holes);
    check_distinct(&all)?;
    if board.len() > 5 || board.len() == 1 || board.len() == 2 {
        return Err(Error::WrongCardCount { expected: 5, got: board.len() });
    }
    let hm = cards_mask(&holes);
    let bm = cards_mask(board);
    let rest = remaining(hm | bm);
    match mode {
        EquityMode::Exhaustive => {
            let (mut total, mut n) = (0.0, 0u64);
            for_each_combo(&rest, 5 - board.len(), &mut |runout| {
                let b = bm | runout;
                let mine = eval_mask(b | hm).0;
                let live: Vec<Card> = rest.iter().copied().filter(|c| runout & c.mask() == 0).collect();
                for i in 0..live.len() {
                    for j in (i + 1)..live.len() {
                        total += score(mine, eval_mask(b | live[i].mask() | live[j].mask()).0);
                        n += 1;
                    }
                }
            });
            Ok(total / n as f64)
        }
        EquityMode::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut deck = rest;
            let need = 7 - board.len();
            let mut total = 0.0;
            for _ in 0..samples {
                let (picked, _) = deck.partial_shuffle(&mut rng, need);
                let opp = picked[0].mask() | picked[1].mask();
                let b = bm | cards_mask(&picked[2..]);
                total += score(eval_mask(b | hm).0, eval_mask(b | opp).0);
            }
            Ok(total / samples as f64)
        }
    }
}

/// River equity of every hole pair on a complete board; pairs that collide
/// with the board are `NaN`.
pub fn river_equities(board: &[Card]) -> Vec<f64> {
    debug_assert_eq!(board.len(), 5);
    let bm = cards_mask(board);
    let mut out = vec![f64::NAN; NUM_PAIRS];
    river_equities_into(bm, &mut out);
    out
}

/// Same as [`river_equities`] with a board mask, writing into `out`.
pub fn river_equities_into(board_mask: u64, out: &mut [f64]) {
    let live: Vec<Card> = Card::all().filter(|c| board_mask & c.mask() == 0).collect();
    let mut hands: Vec<(u32, u8, u8)> = Vec::with_capacity(live.len() * (live.len() - 1) / 2);
    for i in 0..live.len() {
        for j in (i + 1)..live.len() {
            let r = eval_mask(board_mask | live[i].mask() | live[j].mask()).0;
            hands.push((r, live[i].index(), live[j].index()));
        }
    }
    hands.sort_unstable();
    let n = hands.len();
    let opponents = (n - (2 * (live.len() - 1) - 1)) as f64;
    // pairs strictly weaker than the current rank group, total and per card
    let mut below = 0usize;
    let mut below_card = [0usize; 52];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n && hands[end].0 == hands[start].0 {
            end += 1;
        }
        let mut eq_card = [0usize; 52];
        for h in &hands[start..end] {
            eq_card[h.1 as usize] += 1;
            eq_card[h.2 as usize] += 1;
        }
        let eq = end - start;
        for h in &hands[start..end] {
            let (a, b) = (h.1 as usize, h.2 as usize);
            let wins = below - below_card[a] - below_card[b];
            // the hand itself sits in its own group and shares both cards
            let ties = eq + 1 - eq_card[a] - eq_card[b];
            let e = (wins as f64 + 0.5 * ties as f64) / opponents;
            out[pair_index(Card::from_index(h.1).unwrap(), Card::from_index(h.2).unwrap())] = e;
        }
        for h in &hands[start..end] {
            below_card[h.1 as usize] += 1;
            below_card[h.2 as usize] += 1;
        }
        below += eq;
        start = end;
    }
}

/// Whether a pair collides with a card mask.
#[inline]
pub fn pair_blocked(pair: usize, mask: u64) -> bool {
    let (a, b) = pair_cards(pair);
    (a.mask() | b.mask()) & mask != 0
}
