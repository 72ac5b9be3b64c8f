//! Heads-up no-limit hold'em rules.
//!
//! Seat 0 posts the small blind and acts first preflop; seat 1 acts first on
//! later streets. States are immutable values: [`GameState::apply`] returns a
//! new state and leaves its input untouched.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cards::{cards_mask, check_distinct, Card};
use crate::error::Error;
use crate::eval::eval_mask;

pub type Chips = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Round {
    Preflop = 0,
    Flop = 1,
    Turn = 2,
    River = 3,
    Terminal = 4,
}

impl Round {
    pub fn board_len(self) -> usize {
        match self {
            Round::Preflop => 0,
            Round::Flop => 3,
            Round::Turn => 4,
            Round::River | Round::Terminal => 5,
        }
    }

    pub fn from_board_len(n: usize) -> Option<Round> {
        match n {
            0 => Some(Round::Preflop),
            3 => Some(Round::Flop),
            4 => Some(Round::Turn),
            5 => Some(Round::River),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Round {
        match i {
            0 => Round::Preflop,
            1 => Round::Flop,
            2 => Round::Turn,
            3 => Round::River,
            _ => Round::Terminal,
        }
    }

    fn next(self) -> Round {
        Round::from_index(self.index() + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RulesConfig {
    pub starting_stack: Chips,
    pub small_blind: Chips,
    pub big_blind: Chips,
}

impl Default for RulesConfig {
    fn default() -> Self {
        RulesConfig { starting_stack: 20_000, small_blind: 50, big_blind: 100 }
    }
}

impl RulesConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.small_blind == 0 || self.small_blind >= self.big_blind {
            return Err(Error::InvalidConfig("small blind must be positive and below the big blind"));
        }
        if self.big_blind > self.starting_stack {
            return Err(Error::InvalidConfig("big blind exceeds the starting stack"));
        }
        Ok(())
    }
}

/// A player decision. `Call` doubles as check; `RaiseTo` names the total
/// wager for the current round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Fold,
    Call,
    RaiseTo(Chips),
    AllIn,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Fold => write!(f, "fold"),
            Action::Call => write!(f, "call"),
            Action::RaiseTo(x) => write!(f, "raise-to {x}"),
            Action::AllIn => write!(f, "all-in"),
        }
    }
}

/// The unabstracted legal action set at a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LegalActions {
    pub fold: bool,
    /// Chips the actor must add to call (zero means check).
    pub call_cost: Chips,
    /// Inclusive raise-to bounds, when a full raise is possible.
    pub raise: Option<(Chips, Chips)>,
    /// All-in is a (possibly incomplete) raise.
    pub all_in: bool,
}

impl LegalActions {
    pub fn contains(&self, a: Action) -> bool {
        match a {
            Action::Fold => self.fold,
            Action::Call => true,
            Action::RaiseTo(x) => matches!(self.raise, Some((lo, hi)) if x >= lo && x <= hi),
            Action::AllIn => self.all_in,
        }
    }
}

/// Cards for one hand: both players' holes plus the five board cards in deal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Deal {
    pub holes: [[Card; 2]; 2],
    pub board: [Card; 5],
}

impl Deal {
    pub fn new(holes: [[Card; 2]; 2], board: [Card; 5]) -> Result<Deal, Error> {
        let mut all = Vec::with_capacity(9);
        all.extend_from_slice(&holes[0]);
        all.extend_from_slice(&holes[1]);
        all.extend_from_slice(&board);
        check_distinct(&all)?;
        Ok(Deal { holes, board })
    }

    pub fn from_seed(seed: u64) -> Deal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Deal::from_rng(&mut rng)
    }

    pub fn from_rng<R: rand::Rng>(rng: &mut R) -> Deal {
        let mut deck: Vec<Card> = Card::all().collect();
        let (picked, _) = deck.partial_shuffle(rng, 9);
        Deal {
            holes: [[picked[0], picked[1]], [picked[2], picked[3]]],
            board: [picked[4], picked[5], picked[6], picked[7], picked[8]],
        }
    }

    /// The same cards with the two seats' holes exchanged.
    pub fn swapped(&self) -> Deal {
        Deal { holes: [self.holes[1], self.holes[0]], board: self.board }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DealSource {
    Seed(u64),
    Explicit(Deal),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Fold { folder: usize },
    Showdown,
}

/// Betting state without cards or history; cheap to copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Betting {
    config: RulesConfig,
    round: Round,
    /// Chips committed over the whole hand, per seat.
    committed: [Chips; 2],
    /// Chips committed in the current round, per seat.
    wagers: [Chips; 2],
    /// Size of the last full raise increment this round.
    last_raise: Chips,
    acted: [bool; 2],
    to_act: u8,
    board_len: u8,
    round_actions: u8,
    outcome: Option<Outcome>,
}

impl Betting {
    pub fn new(config: RulesConfig) -> Result<Betting, Error> {
        config.validate()?;
        Ok(Betting {
            config,
            round: Round::Preflop,
            committed: [config.small_blind, config.big_blind],
            wagers: [config.small_blind, config.big_blind],
            last_raise: config.big_blind,
            acted: [false; 2],
            to_act: 0,
            board_len: 0,
            round_actions: 0,
            outcome: None,
        })
    }

    pub fn config(&self) -> &RulesConfig {
        &self.config
    }

    pub fn round(&self) -> Round {
        self.round
    }

    pub fn board_len(&self) -> usize {
        self.board_len as usize
    }

    pub fn stack(&self, seat: usize) -> Chips {
        self.config.starting_stack - self.committed[seat]
    }

    pub fn committed(&self) -> [Chips; 2] {
        self.committed
    }

    pub fn wagers(&self) -> [Chips; 2] {
        self.wagers
    }

    pub fn pot(&self) -> Chips {
        self.committed[0] + self.committed[1]
    }

    pub fn to_act(&self) -> usize {
        self.to_act as usize
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    /// Number of actions taken so far in the current round.
    pub fn round_action_count(&self) -> usize {
        self.round_actions as usize
    }

    pub fn call_level(&self) -> Chips {
        self.wagers[0].max(self.wagers[1])
    }

    pub fn legal_actions(&self) -> Result<LegalActions, Error> {
        if self.is_terminal() {
            return Err(Error::TerminalState);
        }
        let p = self.to_act();
        let o = 1 - p;
        let level = self.call_level();
        let facing = level > self.wagers[p];
        let max_total = self.wagers[p] + self.stack(p);
        let call_cost = (level - self.wagers[p]).min(self.stack(p));
        // No raising into an opponent who is already all-in.
        let opp_can_respond = self.stack(o) > 0;
        let can_raise = opp_can_respond && max_total > level;
        let min_to = level + self.last_raise.max(self.config.big_blind);
        let raise = if can_raise && max_total >= min_to { Some((min_to, max_total)) } else { None };
        Ok(LegalActions { fold: facing, call_cost, raise, all_in: can_raise })
    }

    pub fn apply(&self, action: Action) -> Result<Betting, Error> {
        let legal = self.legal_actions()?;
        if !legal.contains(action) {
            return Err(Error::IllegalAction(alloc::format!("{action}")));
        }
        let mut s = *self;
        let p = s.to_act();
        let o = 1 - p;
        s.acted[p] = true;
        s.round_actions += 1;
        match action {
            Action::Fold => {
                s.outcome = Some(Outcome::Fold { folder: p });
                s.round = Round::Terminal;
                return Ok(s);
            }
            Action::Call => {
                let add = legal.call_cost;
                s.wagers[p] += add;
                s.committed[p] += add;
            }
            Action::RaiseTo(_) | Action::AllIn => {
                let total = match action {
                    Action::RaiseTo(x) => x,
                    _ => s.wagers[p] + s.stack(p),
                };
                let level = s.call_level();
                let increment = total - level;
                if increment >= s.last_raise.max(s.config.big_blind) {
                    s.last_raise = increment;
                }
                let add = total - s.wagers[p];
                s.wagers[p] = total;
                s.committed[p] += add;
                s.acted[o] = false;
            }
        }
        s.to_act = o as u8;
        if s.betting_closed() {
            s.close_round();
        }
        Ok(s)
    }

    fn betting_closed(&self) -> bool {
        let matched = self.wagers[0] == self.wagers[1]
            || (self.wagers[0] < self.wagers[1] && self.stack(0) == 0)
            || (self.wagers[1] < self.wagers[0] && self.stack(1) == 0);
        if !matched {
            return false;
        }
        let all_in = self.stack(0) == 0 || self.stack(1) == 0;
        (self.acted[0] && self.acted[1]) || (all_in && self.acted[self.to_act() ^ 1])
    }

    fn close_round(&mut self) {
        let all_in = self.stack(0) == 0 || self.stack(1) == 0;
        if self.round == Round::River || all_in {
            self.round = Round::Terminal;
            self.outcome = Some(Outcome::Showdown);
            self.board_len = 5;
            return;
        }
        self.round = self.round.next();
        self.board_len = self.round.board_len() as u8;
        self.wagers = [0, 0];
        self.last_raise = self.config.big_blind;
        self.acted = [false; 2];
        self.to_act = 1;
        self.round_actions = 0;
    }

    /// Net chips per seat given whether seat 0's hand wins (`Greater`) at showdown.
    pub fn utility(&self, showdown: core::cmp::Ordering) -> Result<[i64; 2], Error> {
        match self.outcome {
            None => Err(Error::NotTerminal),
            Some(Outcome::Fold { folder }) => {
                let lost = self.committed[folder] as i64;
                let mut u = [lost, lost];
                u[folder] = -lost;
                Ok(u)
            }
            Some(Outcome::Showdown) => {
                let stake = self.committed[0].min(self.committed[1]) as i64;
                Ok(match showdown {
                    core::cmp::Ordering::Greater => [stake, -stake],
                    core::cmp::Ordering::Less => [-stake, stake],
                    core::cmp::Ordering::Equal => [0, 0],
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    bet: Betting,
    deal: Deal,
    history: Vec<Vec<Action>>,
}

impl GameState {
    pub fn new_hand(config: RulesConfig, source: DealSource) -> Result<GameState, Error> {
        let bet = Betting::new(config)?;
        let deal = match source {
            DealSource::Seed(s) => Deal::from_seed(s),
            DealSource::Explicit(d) => Deal::new(d.holes, d.board)?,
        };
        Ok(GameState { bet, deal, history: alloc::vec![Vec::new()] })
    }

    pub fn betting(&self) -> &Betting {
        &self.bet
    }

    pub fn config(&self) -> &RulesConfig {
        &self.bet.config
    }

    pub fn deal(&self) -> &Deal {
        &self.deal
    }

    pub fn round(&self) -> Round {
        self.bet.round
    }

    /// Board cards visible in the current round (all five once terminal after a showdown).
    pub fn board(&self) -> &[Card] {
        &self.deal.board[..self.bet.board_len as usize]
    }

    pub fn holes(&self, seat: usize) -> [Card; 2] {
        self.deal.holes[seat]
    }

    pub fn stack(&self, seat: usize) -> Chips {
        self.bet.stack(seat)
    }

    pub fn stacks(&self) -> [Chips; 2] {
        [self.stack(0), self.stack(1)]
    }

    pub fn committed(&self) -> [Chips; 2] {
        self.bet.committed
    }

    pub fn wagers(&self) -> [Chips; 2] {
        self.bet.wagers
    }

    /// All chips committed this hand, including the current round's wagers.
    pub fn pot(&self) -> Chips {
        self.bet.pot()
    }

    /// Chips from completed rounds only.
    pub fn settled_pot(&self) -> Chips {
        self.pot() - self.bet.wagers[0] - self.bet.wagers[1]
    }

    pub fn to_act(&self) -> usize {
        self.bet.to_act()
    }

    pub fn is_terminal(&self) -> bool {
        self.bet.is_terminal()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.bet.outcome
    }

    pub fn history(&self) -> &[Vec<Action>] {
        &self.history
    }

    /// Actions taken so far in the current betting round.
    pub fn round_actions(&self) -> &[Action] {
        self.history.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn call_level(&self) -> Chips {
        self.bet.call_level()
    }

    pub fn legal_actions(&self) -> Result<LegalActions, Error> {
        self.bet.legal_actions()
    }

    pub fn apply(&self, action: Action) -> Result<GameState, Error> {
        let bet = self.bet.apply(action)?;
        let mut history = self.history.clone();
        history.last_mut().expect("round history").push(action);
        if !bet.is_terminal() && bet.round != self.bet.round {
            history.push(Vec::new());
        }
        Ok(GameState { bet, deal: self.deal, history })
    }

    /// Net chips won per seat; always sums to zero.
    pub fn terminal_utility(&self) -> Result<[i64; 2], Error> {
        let board = cards_mask(&self.deal.board);
        let r0 = eval_mask(board | cards_mask(&self.deal.holes[0]));
        let r1 = eval_mask(board | cards_mask(&self.deal.holes[1]));
        self.bet.utility(r0.cmp(&r1))
    }

    /// Chip conservation: commitments plus stacks account for both starting stacks.
    pub fn chips_conserved(&self) -> bool {
        let w = self.bet.wagers;
        let stack = self.bet.config.starting_stack;
        self.settled_pot() + self.stack(0) + self.stack(1) + w[0] + w[1] == 2 * stack && w[0] <= stack && w[1] <= stack
    }

    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.history.iter().enumerate() {
            if i > 0 {
                out.push('/');
            }
            for (j, a) in r.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&alloc::format!("{a}"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;

    fn deal(s: &str) -> Deal {
        let c = parse_cards(s).unwrap();
        Deal::new([[c[0], c[1]], [c[2], c[3]]], [c[4], c[5], c[6], c[7], c[8]]).unwrap()
    }

    fn root() -> GameState {
        GameState::new_hand(RulesConfig::default(), DealSource::Seed(7)).unwrap()
    }

    #[test]
    fn blinds_posted() {
        let s = root();
        assert_eq!(s.pot(), 150);
        assert_eq!(s.to_act(), 0);
        assert_eq!(s.stacks(), [19_950, 19_900]);
        assert!(s.chips_conserved());
    }

    #[test]
    fn explicit_deal_with_duplicates_rejected() {
        let c = parse_cards("As").unwrap()[0];
        let k = parse_cards("Kd 2c 3c 4c 5c 6c 7c").unwrap();
        let bad = Deal { holes: [[c, c], [k[0], k[1]]], board: [k[2], k[3], k[4], k[5], k[6]] };
        let r = GameState::new_hand(RulesConfig::default(), DealSource::Explicit(bad));
        assert!(matches!(r, Err(Error::DuplicateCard(_))));
    }

    #[test]
    fn preflop_root_legal_set() {
        let l = root().legal_actions().unwrap();
        assert!(l.fold);
        assert_eq!(l.call_cost, 50);
        assert_eq!(l.raise, Some((200, 20_000)));
        assert!(l.all_in);
    }

    #[test]
    fn no_fold_when_not_facing_a_bet() {
        let s = root().apply(Action::Call).unwrap().apply(Action::Call).unwrap();
        assert_eq!(s.round(), Round::Flop);
        assert_eq!(s.to_act(), 1);
        let l = s.legal_actions().unwrap();
        assert!(!l.fold);
        assert_eq!(l.call_cost, 0);
        assert_eq!(l.raise, Some((100, 19_900)));
    }

    #[test]
    fn short_stack_facing_exact_call() {
        let cfg = RulesConfig { starting_stack: 1_000, small_blind: 50, big_blind: 100 };
        let s = GameState::new_hand(cfg, DealSource::Seed(1)).unwrap();
        let s = s.apply(Action::RaiseTo(1_000)).unwrap();
        let l = s.legal_actions().unwrap();
        assert!(l.fold);
        assert_eq!(l.call_cost, 900);
        assert_eq!(l.raise, None);
        assert!(!l.all_in);
        assert_eq!(s.stack(1), 900);
    }

    #[test]
    fn raise_arithmetic() {
        let s = root().apply(Action::RaiseTo(300)).unwrap();
        assert_eq!(s.wagers()[0], 300);
        assert_eq!(s.pot(), 400);
        assert_eq!(s.to_act(), 1);
        // min re-raise adds at least the previous increment of 200
        assert_eq!(s.legal_actions().unwrap().raise, Some((500, 20_000)));
    }

    #[test]
    fn fold_awards_pot() {
        let s = root().apply(Action::RaiseTo(300)).unwrap().apply(Action::Fold).unwrap();
        assert!(s.is_terminal());
        assert_eq!(s.terminal_utility().unwrap(), [100, -100]);
    }

    #[test]
    fn fold_after_postflop_bet_pays_folder_commitment() {
        // 500 each preflop, then a flop bet that is folded to
        let s = root()
            .apply(Action::RaiseTo(500))
            .unwrap()
            .apply(Action::Call)
            .unwrap()
            .apply(Action::Call)
            .unwrap()
            .apply(Action::RaiseTo(600))
            .unwrap()
            .apply(Action::Fold)
            .unwrap();
        // seat 1 checked, seat 0 bet, seat 1 folded
        assert_eq!(s.terminal_utility().unwrap(), [500, -500]);
    }

    #[test]
    fn all_in_runs_out_to_showdown() {
        let s = root().apply(Action::AllIn).unwrap().apply(Action::Call).unwrap();
        assert!(s.is_terminal());
        assert_eq!(s.outcome(), Some(Outcome::Showdown));
        assert_eq!(s.board().len(), 5);
        let u = s.terminal_utility().unwrap();
        assert_eq!(u[0] + u[1], 0);
    }

    #[test]
    fn board_split_is_zero() {
        let d = deal("2c 3d 2h 3s As Ks Qs Js Ts");
        let mut s = GameState::new_hand(RulesConfig::default(), DealSource::Explicit(d)).unwrap();
        s = s.apply(Action::Call).unwrap().apply(Action::Call).unwrap();
        for _ in 0..3 {
            s = s.apply(Action::Call).unwrap().apply(Action::Call).unwrap();
        }
        assert!(s.is_terminal());
        assert_eq!(s.terminal_utility().unwrap(), [0, 0]);
    }

    #[test]
    fn showdown_winner_takes_loser_commitment() {
        let d = deal("As Ad Ks Kd 2c 7h 9s Jc Qd");
        let mut s = GameState::new_hand(RulesConfig::default(), DealSource::Explicit(d)).unwrap();
        s = s.apply(Action::RaiseTo(300)).unwrap().apply(Action::Call).unwrap();
        for _ in 0..3 {
            s = s.apply(Action::Call).unwrap().apply(Action::Call).unwrap();
        }
        assert_eq!(s.terminal_utility().unwrap(), [300, -300]);
    }

    #[test]
    fn non_terminal_utility_errors() {
        assert_eq!(root().terminal_utility(), Err(Error::NotTerminal));
        let t = root().apply(Action::Fold).unwrap();
        assert_eq!(t.legal_actions(), Err(Error::TerminalState));
    }
}
