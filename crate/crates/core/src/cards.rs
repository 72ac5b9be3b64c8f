//! Card primitives and the text format used in logs, configs and the wire protocol.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;

pub const RANK_CHARS: &[u8; 13] = b"23456789TJQKA";
pub const SUIT_CHARS: &[u8; 4] = b"cdhs";

/// A playing card, encoded as `rank * 4 + suit` (0..52).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Card(u8);

impl Card {
    pub fn new(rank: u8, suit: u8) -> Result<Card, Error> {
        if rank > 12 || suit > 3 {
            return Err(Error::InvalidCard);
        }
        Ok(Card(rank * 4 + suit))
    }

    pub fn from_index(index: u8) -> Result<Card, Error> {
        if index >= 52 {
            return Err(Error::InvalidCard);
        }
        Ok(Card(index))
    }

    #[inline]
    pub fn index(self) -> u8 {
        self.0
    }

    /// 0 = deuce .. 12 = ace.
    #[inline]
    pub fn rank(self) -> u8 {
        self.0 >> 2
    }

    #[inline]
    pub fn suit(self) -> u8 {
        self.0 & 3
    }

    #[inline]
    pub fn mask(self) -> u64 {
        1u64 << self.0
    }

    pub fn all() -> impl Iterator<Item = Card> {
        (0..52).map(Card)
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            RANK_CHARS[self.rank() as usize] as char,
            SUIT_CHARS[self.suit() as usize] as char
        )
    }
}

impl FromStr for Card {
    type Err = Error;

    fn from_str(s: &str) -> Result<Card, Error> {
        let b = s.as_bytes();
        if b.len() != 2 {
            return Err(Error::InvalidCard);
        }
        let rank = RANK_CHARS
            .iter()
            .position(|&c| c == b[0].to_ascii_uppercase())
            .ok_or(Error::InvalidCard)?;
        let suit = SUIT_CHARS
            .iter()
            .position(|&c| c == b[1].to_ascii_lowercase())
            .ok_or(Error::InvalidCard)?;
        Card::new(rank as u8, suit as u8)
    }
}

/// Parses a space-separated card list ("As Kd 7c"). Duplicates are rejected.
pub fn parse_cards(s: &str) -> Result<Vec<Card>, Error> {
    let cards = s
        .split_whitespace()
        .map(Card::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    check_distinct(&cards)?;
    Ok(cards)
}

pub fn format_cards(cards: &[Card]) -> String {
    let mut out = String::new();
    for (i, c) in cards.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&alloc::format!("{c}"));
    }
    out
}

pub fn cards_mask(cards: &[Card]) -> u64 {
    cards.iter().fold(0, |m, c| m | c.mask())
}

pub fn check_distinct(cards: &[Card]) -> Result<(), Error> {
    let mut seen = 0u64;
    for c in cards {
        if seen & c.mask() != 0 {
            return Err(Error::DuplicateCard(*c));
        }
        seen |= c.mask();
    }
    Ok(())
}

/// Number of two-card holdings.
pub const NUM_PAIRS: usize = 1326;

/// Dense index of an unordered hole pair in `0..1326`.
#[inline]
pub fn pair_index(a: Card, b: Card) -> usize {
    let (lo, hi) = if a.0 < b.0 { (a.0 as usize, b.0 as usize) } else { (b.0 as usize, a.0 as usize) };
    hi * (hi - 1) / 2 + lo
}

/// Inverse of [`pair_index`]; the lower card comes first.
pub fn pair_cards(index: usize) -> (Card, Card) {
    PAIR_TABLE.with(index)
}

struct PairTable;

impl PairTable {
    fn with(&self, index: usize) -> (Card, Card) {
        // hi is the largest integer with hi*(hi-1)/2 <= index
        let mut hi = ((libm::sqrt(8.0 * index as f64 + 1.0) + 1.0) / 2.0) as usize;
        while hi * (hi - 1) / 2 > index {
            hi -= 1;
        }
        while (hi + 1) * hi / 2 <= index {
            hi += 1;
        }
        let lo = index - hi * (hi - 1) / 2;
        (Card(lo as u8), Card(hi as u8))
    }
}

static PAIR_TABLE: PairTable = PairTable;

/// A 52-card deck in index order.
pub fn full_deck() -> Vec<Card> {
    Card::all().collect()
}
