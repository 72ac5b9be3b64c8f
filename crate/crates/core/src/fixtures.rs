//! Small poker games with known solutions, used to verify the solvers.
//!
//! Action labels are shared by both games: 0 = fold, 1 = check/call, 2 = bet/raise.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::Error;
use crate::tree::{ActionSeq, GameTree, InfosetKey, NodeId};

pub const FOLD: u8 = 0;
pub const CALL: u8 = 1;
pub const RAISE: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    Kuhn,
    Leduc,
}

impl core::str::FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Fixture, Error> {
        match s {
            "kuhn" => Ok(Fixture::Kuhn),
            "leduc" => Ok(Fixture::Leduc),
            other => Err(Error::UnknownGame(other.to_string())),
        }
    }
}

pub fn make_fixture(name: &str) -> Result<GameTree, Error> {
    Ok(match name.parse::<Fixture>()? {
        Fixture::Kuhn => kuhn(),
        Fixture::Leduc => leduc(),
    })
}

/// Kuhn poker: three cards, one-chip ante, one-chip bet, single round.
pub fn kuhn() -> GameTree {
    let mut t = GameTree::new();
    let mut deals = Vec::new();
    for c0 in 0..3u8 {
        for c1 in 0..3u8 {
            if c0 != c1 {
                let root = kuhn_node(&mut t, [c0, c1], ActionSeq::EMPTY, 0, false);
                deals.push((1.0 / 6.0, root));
            }
        }
    }
    let root = t.add_chance(deals);
    t.set_root(root);
    t
}

fn kuhn_node(t: &mut GameTree, cards: [u8; 2], hist: ActionSeq, player: usize, facing: bool) -> NodeId {
    let win = if cards[0] > cards[1] { 1.0 } else { -1.0 };
    let key = InfosetKey::new(player, 0, cards[player] as u32, hist);
    let children = if facing {
        let folder_sign = if player == 0 { -1.0 } else { 1.0 };
        let fold = t.add_terminal(folder_sign);
        let call = t.add_terminal(2.0 * win);
        alloc::vec![fold, call]
    } else {
        let check = if player == 0 {
            kuhn_node(t, cards, hist.push(CALL as usize), 1, false)
        } else {
            t.add_terminal(win)
        };
        let bet = kuhn_node(t, cards, hist.push(RAISE as usize), 1 - player, true);
        alloc::vec![check, bet]
    };
    t.add_decision(key, children).expect("consistent kuhn infosets")
}

/// Public betting state of Leduc hold'em (six cards: two each of J, Q, K).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LeducPublic {
    pub round: u8,
    pub public_card: Option<u8>,
    pub contrib: [u32; 2],
    pub raises: u8,
    pub to_act: u8,
    pub facing: bool,
    pub round_actions: u8,
    pub history: ActionSeq,
    pub end: Option<LeducEnd>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeducEnd {
    Fold { folder: u8 },
    Showdown,
    /// First betting round closed; the public card is next.
    RoundOver,
}

impl Default for LeducPublic {
    fn default() -> Self {
        LeducPublic::root()
    }
}

impl LeducPublic {
    pub fn root() -> LeducPublic {
        LeducPublic {
            round: 0,
            public_card: None,
            contrib: [1, 1],
            raises: 0,
            to_act: 0,
            facing: false,
            round_actions: 0,
            history: ActionSeq::EMPTY,
            end: None,
        }
    }

    pub fn bet_size(&self) -> u32 {
        if self.round == 0 { 2 } else { 4 }
    }

    /// Action labels available at this decision.
    pub fn actions(&self) -> Vec<u8> {
        if self.end.is_some() {
            return Vec::new();
        }
        if self.facing {
            if self.raises < 2 {
                alloc::vec![FOLD, CALL, RAISE]
            } else {
                alloc::vec![FOLD, CALL]
            }
        } else {
            alloc::vec![CALL, RAISE]
        }
    }

    pub fn apply(&self, label: u8) -> LeducPublic {
        let mut s = *self;
        let p = s.to_act as usize;
        s.history = s.history.push(label as usize);
        s.round_actions += 1;
        match label {
            FOLD => {
                s.end = Some(LeducEnd::Fold { folder: p as u8 });
                return s;
            }
            CALL => {
                s.contrib[p] = s.contrib[1 - p];
                let closes = s.facing || s.round_actions >= 2;
                s.facing = false;
                if closes {
                    s.end = Some(if s.round == 0 { LeducEnd::RoundOver } else { LeducEnd::Showdown });
                    return s;
                }
            }
            _ => {
                s.contrib[p] = s.contrib[1 - p] + s.bet_size();
                s.raises += 1;
                s.facing = true;
            }
        }
        s.to_act = 1 - s.to_act;
        s
    }

    /// Second-round root after the public card is revealed.
    pub fn deal_public(&self, card: u8) -> LeducPublic {
        debug_assert_eq!(self.end, Some(LeducEnd::RoundOver));
        LeducPublic {
            round: 1,
            public_card: Some(card),
            raises: 0,
            to_act: 0,
            facing: false,
            round_actions: 0,
            end: None,
            ..*self
        }
    }

    pub fn key(&self, player: usize, card: u8) -> InfosetKey {
        InfosetKey::new(player, self.round as usize, leduc_bucket(card, self.public_card), self.history)
    }

    /// Payoff to player 0 at a terminal public state.
    pub fn payoff(&self, cards: [u8; 2]) -> f64 {
        match self.end {
            Some(LeducEnd::Fold { folder }) => {
                let lost = self.contrib[folder as usize] as f64;
                if folder == 0 { -lost } else { lost }
            }
            Some(LeducEnd::Showdown) => {
                let pc = self.public_card.expect("showdown has a public card");
                let s0 = leduc_strength(cards[0], pc);
                let s1 = leduc_strength(cards[1], pc);
                let stake = self.contrib[0] as f64;
                match s0.cmp(&s1) {
                    core::cmp::Ordering::Greater => stake,
                    core::cmp::Ordering::Less => -stake,
                    core::cmp::Ordering::Equal => 0.0,
                }
            }
            _ => 0.0,
        }
    }
}

/// Private bucket: card rank in round one, (rank, public rank) afterwards.
pub fn leduc_bucket(card: u8, public: Option<u8>) -> u32 {
    match public {
        None => card as u32,
        Some(p) => 3 + 3 * p as u32 + card as u32,
    }
}

fn leduc_strength(card: u8, public: u8) -> u8 {
    if card == public { 10 + card } else { card }
}

/// Probability that both players hold the given ranks.
pub fn leduc_deal_prob(cards: [u8; 2]) -> f64 {
    if cards[0] == cards[1] { 1.0 / 15.0 } else { 2.0 / 15.0 }
}

/// Probability of the public rank given both private ranks.
pub fn leduc_public_prob(cards: [u8; 2], public: u8) -> f64 {
    let used = (cards[0] == public) as u32 + (cards[1] == public) as u32;
    (2 - used) as f64 / 4.0
}

/// Builds the subtree below a public state for a fixed private deal. At the
/// end of the first round `leaf` is consulted: returning `Some(node)` cuts the
/// tree there (depth limit), `None` expands the public-card chance node.
pub fn leduc_subtree<F>(t: &mut GameTree, s: &LeducPublic, cards: [u8; 2], leaf: &mut F) -> NodeId
where
    F: FnMut(&mut GameTree, &LeducPublic, [u8; 2]) -> Option<NodeId>,
{
    match s.end {
        Some(LeducEnd::RoundOver) => {
            if let Some(n) = leaf(t, s, cards) {
                return n;
            }
            let mut outcomes = Vec::new();
            for pc in 0..3u8 {
                let p = leduc_public_prob(cards, pc);
                if p > 0.0 {
                    let c = leduc_subtree(t, &s.deal_public(pc), cards, leaf);
                    outcomes.push((p, c));
                }
            }
            t.add_chance(outcomes)
        }
        Some(_) => t.add_terminal(s.payoff(cards)),
        None => {
            let children = s
                .actions()
                .into_iter()
                .map(|a| leduc_subtree(t, &s.apply(a), cards, leaf))
                .collect();
            let p = s.to_act as usize;
            t.add_decision(s.key(p, cards[p]), children).expect("consistent leduc infosets")
        }
    }
}

/// Leduc hold'em: ante 1, bets of 2 then 4, at most two raises per round.
pub fn leduc() -> GameTree {
    let mut t = GameTree::new();
    let root = LeducPublic::root();
    let mut deals = Vec::new();
    for c0 in 0..3u8 {
        for c1 in 0..3u8 {
            let n = leduc_subtree(&mut t, &root, [c0, c1], &mut |_, _, _| None);
            deals.push((leduc_deal_prob([c0, c1]), n));
        }
    }
    let r = t.add_chance(deals);
    t.set_root(r);
    t
}

/// Every public state reachable in Leduc, in depth-first order.
pub fn leduc_public_states() -> Vec<LeducPublic> {
    fn walk(s: LeducPublic, out: &mut Vec<LeducPublic>) {
        out.push(s);
        match s.end {
            Some(LeducEnd::RoundOver) => {
                for pc in 0..3 {
                    walk(s.deal_public(pc), out);
                }
            }
            Some(_) => {}
            None => {
                for a in s.actions() {
                    walk(s.apply(a), out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(LeducPublic::root(), &mut out);
    out
}
