use alloc::string::String;
use core::fmt;

use crate::cards::Card;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidCard,
    DuplicateCard(Card),
    WrongCardCount { expected: usize, got: usize },
    InvalidConfig(&'static str),
    TerminalState,
    NotTerminal,
    IllegalAction(String),
    UnknownGame(String),
    EmptyVector,
    TreeTooLarge { limit: usize },
    KeyMismatch(String),
    InvalidClusterCount { k: usize, points: usize },
    RoundMismatch,
    UnassignedIndex(u64),
    OutOfRange,
    UnreachableHistory,
    InvalidSpec(&'static str),
    EmptyModelSet,
    ZeroPosterior,
    FingerprintMismatch { expected: u64, found: u64 },
    RiverHistogram,
    Malformed(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidCard => write!(f, "invalid card"),
            Error::DuplicateCard(c) => write!(f, "duplicate card {c}"),
            Error::WrongCardCount { expected, got } => {
                write!(f, "expected {expected} cards, got {got}")
            }
            Error::InvalidConfig(why) => write!(f, "invalid config: {why}"),
            Error::TerminalState => write!(f, "state is terminal"),
            Error::NotTerminal => write!(f, "state is not terminal"),
            Error::IllegalAction(a) => write!(f, "illegal action: {a}"),
            Error::UnknownGame(name) => write!(f, "unknown game '{name}'"),
            Error::EmptyVector => write!(f, "empty vector"),
            Error::TreeTooLarge { limit } => write!(f, "game tree exceeds {limit} nodes"),
            Error::KeyMismatch(k) => write!(f, "infoset key mismatch: {k}"),
            Error::InvalidClusterCount { k, points } => {
                write!(f, "cannot form {k} clusters from {points} distinct points")
            }
            Error::RoundMismatch => write!(f, "board size does not match the bucket map round"),
            Error::UnassignedIndex(i) => write!(f, "canonical index {i} has no bucket"),
            Error::OutOfRange => write!(f, "value outside the bracketing interval"),
            Error::UnreachableHistory => write!(f, "history is not reachable in the abstract tree"),
            Error::InvalidSpec(why) => write!(f, "invalid subgame spec: {why}"),
            Error::EmptyModelSet => write!(f, "opponent model set is empty"),
            Error::ZeroPosterior => write!(f, "observed action has zero probability under the whole range"),
            Error::FingerprintMismatch { expected, found } => {
                write!(f, "abstraction fingerprint mismatch: expected {expected:016x}, found {found:016x}")
            }
            Error::Malformed(what) => write!(f, "malformed data: {what}"),
            Error::RiverHistogram => write!(f, "equity histograms are not defined on the river"),
        }
    }
}

impl core::error::Error for Error {}
