//! Five-to-seven card hand evaluation.
//!
//! A [`HandRank`] is a single comparable integer: the category in bits 20..24
//! and up to five tiebreak ranks, four bits each, most significant first.

use crate::cards::Card;
use crate::error::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HandRank(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Category {
    HighCard = 0,
    Pair,
    TwoPair,
    Trips,
    Straight,
    Flush,
    FullHouse,
    Quads,
    StraightFlush,
}

impl HandRank {
    pub fn category(self) -> Category {
        match self.0 >> 20 {
            0 => Category::HighCard,
            1 => Category::Pair,
            2 => Category::TwoPair,
            3 => Category::Trips,
            4 => Category::Straight,
            5 => Category::Flush,
            6 => Category::FullHouse,
            7 => Category::Quads,
            _ => Category::StraightFlush,
        }
    }

    /// Tiebreak ranks, most significant first (unused slots are zero).
    pub fn tiebreak(self) -> [u8; 5] {
        let mut out = [0u8; 5];
        for (i, r) in out.iter_mut().enumerate() {
            *r = ((self.0 >> (16 - 4 * i)) & 0xf) as u8;
        }
        out
    }
}

fn pack(cat: Category, ranks: &[u8]) -> HandRank {
    let mut v = (cat as u32) << 20;
    for (i, &r) in ranks.iter().take(5).enumerate() {
        v |= (r as u32) << (16 - 4 * i);
    }
    HandRank(v)
}

/// Highest rank of a five-long run in a 13-bit rank mask; the wheel counts as five-high.
#[inline]
fn straight_high(mask: u16) -> Option<u8> {
    let m = mask as u32;
    let mut run = m & (m << 1) & (m << 2) & (m << 3) & (m << 4);
    if run != 0 {
        let mut hi = 0;
        while run > 1 {
            run >>= 1;
            hi += 1;
        }
        return Some(hi as u8);
    }
    // A-2-3-4-5
    if m & 0b1_0000_0000_1111 == 0b1_0000_0000_1111 {
        return Some(3);
    }
    None
}

#[inline]
fn top_ranks(mut mask: u16, n: usize, out: &mut [u8; 5]) -> usize {
    let mut k = 0;
    while k < n && mask != 0 {
        let r = 15 - mask.leading_zeros() as u8;
        out[k] = r;
        k += 1;
        mask &= !(1 << r);
    }
    k
}

/// Evaluates the best five-card hand contained in a card bitmask (5 to 7 cards).
pub fn eval_mask(cards: u64) -> HandRank {
    let mut suits = [0u16; 4];
    let mut counts = [0u8; 13];
    let mut m = cards;
    while m != 0 {
        let i = m.trailing_zeros() as u8;
        m &= m - 1;
        suits[(i & 3) as usize] |= 1 << (i >> 2);
        counts[(i >> 2) as usize] += 1;
    }
    let mut buf = [0u8; 5];
    for s in suits {
        if s.count_ones() >= 5 {
            if let Some(hi) = straight_high(s) {
                return pack(Category::StraightFlush, &[hi]);
            }
            let n = top_ranks(s, 5, &mut buf);
            return pack(Category::Flush, &buf[..n]);
        }
    }
    let all = suits[0] | suits[1] | suits[2] | suits[3];
    let (mut quads, mut trips, mut pairs, mut singles) = (0u16, 0u16, 0u16, 0u16);
    for (r, &c) in counts.iter().enumerate() {
        match c {
            4 => quads |= 1 << r,
            3 => trips |= 1 << r,
            2 => pairs |= 1 << r,
            1 => singles |= 1 << r,
            _ => {}
        }
    }
    if quads != 0 {
        let q = 15 - quads.leading_zeros() as u8;
        let mut kick = [0u8; 5];
        top_ranks(all & !(1 << q), 1, &mut kick);
        return pack(Category::Quads, &[q, kick[0]]);
    }
    if trips != 0 {
        let t = 15 - trips.leading_zeros() as u8;
        let rest = (trips & !(1 << t)) | pairs;
        if rest != 0 {
            let p = 15 - rest.leading_zeros() as u8;
            return pack(Category::FullHouse, &[t, p]);
        }
    }
    if let Some(hi) = straight_high(all) {
        return pack(Category::Straight, &[hi]);
    }
    if trips != 0 {
        let t = 15 - trips.leading_zeros() as u8;
        let mut kick = [0u8; 5];
        top_ranks(all & !(1 << t), 2, &mut kick);
        return pack(Category::Trips, &[t, kick[0], kick[1]]);
    }
    if pairs.count_ones() >= 2 {
        let mut p = [0u8; 5];
        top_ranks(pairs, 2, &mut p);
        let mut kick = [0u8; 5];
        top_ranks(all & !(1 << p[0]) & !(1 << p[1]), 1, &mut kick);
        return pack(Category::TwoPair, &[p[0], p[1], kick[0]]);
    }
    if pairs != 0 {
        let p = 15 - pairs.leading_zeros() as u8;
        let mut kick = [0u8; 5];
        top_ranks(singles, 3, &mut kick);
        return pack(Category::Pair, &[p, kick[0], kick[1], kick[2]]);
    }
    let n = top_ranks(singles, 5, &mut buf);
    pack(Category::HighCard, &buf[..n])
}

/// Evaluates exactly seven distinct cards.
pub fn evaluate7(cards: &[Card]) -> Result<HandRank, Error> {
    evaluate_n(cards, 7)
}

/// Evaluates exactly five distinct cards.
pub fn evaluate5(cards: &[Card]) -> Result<HandRank, Error> {
    evaluate_n(cards, 5)
}

fn evaluate_n(cards: &[Card], n: usize) -> Result<HandRank, Error> {
    if cards.len() != n {
        return Err(Error::WrongCardCount { expected: n, got: cards.len() });
    }
    crate::cards::check_distinct(cards)?;
    Ok(eval_mask(crate::cards::cards_mask(cards)))
}
