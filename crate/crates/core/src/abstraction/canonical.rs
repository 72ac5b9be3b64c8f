//! Suit-isomorphism canonicalization.
//!
//! A class is identified by the lexicographically smallest (board, holes)
//! pair over the 24 suit relabelings: the board is minimized first as a card
//! bitmask, then the hole pair index among relabelings that reach that board.

use crate::cards::{cards_mask, check_distinct, pair_index, Card, NUM_PAIRS};
use crate::error::Error;
use crate::game::Round;

pub const NUM_PREFLOP_CLASSES: usize = 169;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalIndex {
    pub round: Round,
    /// Preflop: dense in `0..169`. Later rounds: canonical board mask times
    /// 1326 plus the canonical hole-pair index.
    pub index: u64,
}

const SUIT_MASK: u64 = 0x1_1111_1111_1111;

/// All 24 permutations of the four suits.
pub const SUIT_PERMS: [[u8; 4]; 24] = {
    let mut out = [[0u8; 4]; 24];
    let mut n = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                let d = 6 - a - b - c;
                if a != b && a != c && b != c && d < 4 && d != a && d != b && d != c {
                    out[n] = [a as u8, b as u8, c as u8, d as u8];
                    n += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

/// Applies a suit relabeling (`perm[old] = new`) to a card bitmask.
#[inline]
pub fn permute_mask(mask: u64, perm: &[u8; 4]) -> u64 {
    let mut out = 0;
    for (s, &to) in perm.iter().enumerate() {
        let bits = (mask >> s) & SUIT_MASK;
        out |= bits << to;
    }
    out
}

#[inline]
pub fn permute_card(c: Card, perm: &[u8; 4]) -> Card {
    Card::new(c.rank(), perm[c.suit() as usize]).expect("valid card")
}

/// Dense preflop class: pairs 0..13, suited 13..91, offsuit 91..169.
pub fn preflop_class(a: Card, b: Card) -> usize {
    let (hi, lo) = if a.rank() >= b.rank() { (a.rank(), b.rank()) } else { (b.rank(), a.rank()) };
    if hi == lo {
        return hi as usize;
    }
    let tri = (hi as usize) * (hi as usize - 1) / 2 + lo as usize;
    if a.suit() == b.suit() { 13 + tri } else { 91 + tri }
}

/// Canonical board mask and the relabeling that produces it (first in [`SUIT_PERMS`] order).
pub fn canonical_board(board: &[Card]) -> (u64, &'static [u8; 4]) {
    let mask = cards_mask(board);
    let mut best = (u64::MAX, &SUIT_PERMS[0]);
    for p in SUIT_PERMS.iter() {
        let m = permute_mask(mask, p);
        if m < best.0 {
            best = (m, p);
        }
    }
    best
}

pub fn canonicalize(holes: [Card; 2], board: &[Card]) -> Result<CanonicalIndex, Error> {
    let round = Round::from_board_len(board.len()).ok_or(Error::WrongCardCount { expected: 5, got: board.len() })?;
    let mut all = [holes[0]; 7];
    all[1] = holes[1];
    all[2..2 + board.len()].copy_from_slice(board);
    check_distinct(&all[..2 + board.len()])?;
    if round == Round::Preflop {
        return Ok(CanonicalIndex { round, index: preflop_class(holes[0], holes[1]) as u64 });
    }
    let mask = cards_mask(board);
    let mut best = (u64::MAX, usize::MAX);
    for p in SUIT_PERMS.iter() {
        let m = permute_mask(mask, p);
        if m > best.0 {
            continue;
        }
        let pi = pair_index(permute_card(holes[0], p), permute_card(holes[1], p));
        if m < best.0 || pi < best.1 {
            best = (m, pi);
        }
    }
    Ok(CanonicalIndex { round, index: best.0 * NUM_PAIRS as u64 + best.1 as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;

    #[test]
    fn perms_are_distinct() {
        for i in 0..24 {
            for j in 0..i {
                assert_ne!(SUIT_PERMS[i], SUIT_PERMS[j]);
            }
        }
    }

    #[test]
    fn suit_swap_preflop() {
        let a = parse_cards("As Kd").unwrap();
        let b = parse_cards("Ah Kc").unwrap();
        assert_eq!(canonicalize([a[0], a[1]], &[]).unwrap(), canonicalize([b[0], b[1]], &[]).unwrap());
        let s = parse_cards("As Ks").unwrap();
        assert_ne!(canonicalize([a[0], a[1]], &[]).unwrap(), canonicalize([s[0], s[1]], &[]).unwrap());
    }

    #[test]
    fn postflop_classes_respect_suits() {
        let f = parse_cards("2c 7c Jd").unwrap();
        let x = parse_cards("Ac Kc").unwrap();
        let y = parse_cards("Ad Kd").unwrap();
        assert_ne!(canonicalize([x[0], x[1]], &f).unwrap(), canonicalize([y[0], y[1]], &f).unwrap());
        let g = parse_cards("2h 7h Js").unwrap();
        let z = parse_cards("Ah Kh").unwrap();
        assert_eq!(canonicalize([x[0], x[1]], &f).unwrap(), canonicalize([z[0], z[1]], &g).unwrap());
    }

    #[test]
    fn duplicates_and_bad_board_sizes() {
        let c = parse_cards("As Kd 2c 3c").unwrap();
        assert!(matches!(canonicalize([c[0], c[0]], &[]), Err(Error::DuplicateCard(_))));
        assert!(canonicalize([c[0], c[1]], &c[2..4]).is_err());
    }
}
