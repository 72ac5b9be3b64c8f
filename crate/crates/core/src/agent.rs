//! The playing agent: blueprint play on the abstract tree, re-solving on the
//! river and after off-tree actions.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::menu::{betting_actions, translate, AbstractAction};
use crate::abstraction::profile::Abstraction;
use crate::blueprint::StrategyStore;
use crate::cards::{cards_mask, pair_cards, pair_index, Card, NUM_PAIRS};
use crate::cfr::Policy;
use crate::error::Error;
use crate::game::{Action, Betting, Round, RulesConfig};
use crate::subgame::hunl::{alt_values, nested_resolve, translated_posterior, HunlSpec, PolicyView, Subgame};
use crate::subgame::{OpponentModel, Range};
use crate::tree::{ActionSeq, InfosetKey};

pub const DEFAULT_BUDGETS: [u64; 4] = [6_000, 6_000, 10_000, 10_000];

#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    /// Re-solve iterations per round (preflop, flop, turn, river).
    pub budgets: [u64; 4],
    pub models: Vec<OpponentModel>,
    pub seed: u64,
    /// Play the most likely action instead of sampling.
    pub purified: bool,
    /// Raises within this fraction of the pot of an abstract size count as that size.
    pub snap_tolerance: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig { budgets: DEFAULT_BUDGETS, models: OpponentModel::default_set(), seed: 0, purified: false, snap_tolerance: 0.0 }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.budgets.contains(&0) {
            return Err(Error::InvalidConfig("search budgets must be positive"));
        }
        if self.models.is_empty() {
            return Err(Error::EmptyModelSet);
        }
        if !(self.snap_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("snap tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// What a seat sees when asked to act.
#[derive(Clone, Copy, Debug)]
pub struct Observation<'a> {
    /// Distinct per hand within a match.
    pub hand_id: u64,
    pub seat: usize,
    pub holes: [Card; 2],
    /// Board cards dealt so far.
    pub board: &'a [Card],
    /// Actions so far, all rounds flattened in order.
    pub actions: &'a [Action],
    pub rules: RulesConfig,
}

impl Observation<'_> {
    /// Betting state after replaying the actions.
    pub fn betting(&self) -> Result<Betting, Error> {
        let mut b = Betting::new(self.rules)?;
        for &a in self.actions {
            b = b.apply(a)?;
        }
        Ok(b)
    }
}

pub trait Player {
    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, Error>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolveEvent {
    pub round: Round,
    pub off_tree: bool,
    pub iterations: u64,
    pub min_margin: f64,
}

/// Counters for checking the decision schedule.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Instrumentation {
    /// Decisions taken from the blueprint, per round.
    pub blueprint_decisions: [u64; 4],
    /// Decisions taken from a re-solved policy, per round.
    pub resolved_decisions: [u64; 4],
    /// Of the resolved decisions, those at off-tree states.
    pub off_tree_decisions: [u64; 4],
    pub resolves: Vec<ResolveEvent>,
    /// Range updates where the observed action had zero probability.
    pub model_violations: u64,
    /// Blueprint queries that fell back to uniform.
    pub blueprint_misses: u64,
}

/// A solved subgame in force for the rest of its round.
struct Active {
    spec: HunlSpec,
    root: Betting,
    /// Menu indices from the root to the current state.
    path: ActionSeq,
    policy: Policy,
    opponent: Policy,
    buckets: Vec<u32>,
}

struct HandTrack {
    hand_id: u64,
    seat: usize,
    holes: [Card; 2],
    seen: usize,
    bet: Betting,
    /// Abstract line, off-tree actions mapped to their likeliest neighbour.
    seq: ActionSeq,
    on_tree: bool,
    ranges: [Range; 2],
    board: Vec<Card>,
    buckets: Vec<u32>,
    active: Option<Active>,
    /// Spec prepared after an off-tree action, rooted at the current state.
    pending: Option<HunlSpec>,
    rng: ChaCha8Rng,
}

pub struct Agent<'a> {
    pub config: AgentConfig,
    abs: &'a Abstraction,
    store: &'a StrategyStore,
    pub stats: Instrumentation,
    hand: Option<HandTrack>,
}

fn live_range(board: u64) -> Range {
    let w = (0..NUM_PAIRS)
        .map(|p| {
            let (a, b) = pair_cards(p);
            if (a.mask() | b.mask()) & board == 0 { 1.0 } else { 0.0 }
        })
        .collect();
    Range::from_weights(w).expect("non-empty support")
}

fn pick<R: Rng>(probs: &[f64], purified: bool, rng: &mut R) -> usize {
    if purified {
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = i;
            }
        }
        return best;
    }
    let x = rng.gen::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

impl<'a> Agent<'a> {
    pub fn new(config: AgentConfig, abs: &'a Abstraction, store: &'a StrategyStore) -> Result<Agent<'a>, Error> {
        config.validate()?;
        store.header.check(abs)?;
        Ok(Agent { config, abs, store, stats: Instrumentation::default(), hand: None })
    }

    fn start_hand(&self, obs: &Observation<'_>) -> Result<HandTrack, Error> {
        let mut seed = self.config.seed ^ (obs.seat as u64) << 62;
        seed ^= (pair_index(obs.holes[0], obs.holes[1]) as u64) << 40;
        let pre = self.abs.maps[0].board_buckets(&[])?;
        Ok(HandTrack {
            hand_id: obs.hand_id,
            seat: obs.seat,
            holes: obs.holes,
            seen: 0,
            bet: Betting::new(obs.rules)?,
            seq: ActionSeq::EMPTY,
            on_tree: true,
            ranges: [Range::uniform(NUM_PAIRS), Range::uniform(NUM_PAIRS)],
            board: Vec::new(),
            buckets: pre,
            active: None,
            pending: None,
            rng: ChaCha8Rng::seed_from_u64(crate::hash::fnv64(&seed.to_le_bytes())),
        })
    }

    /// Blueprint distribution for `seat` at the tracked abstract state, per pair.
    fn blueprint_probs(&self, h: &HandTrack, seat: usize, pair: usize, n: usize) -> Vec<f64> {
        let key = InfosetKey::new(seat, h.bet.round().index(), h.buckets[pair], h.seq);
        self.store.query(&key, n).0.into_owned()
    }

    fn active_probs(a: &Active, bet: &Betting, seat: usize, pair: usize, n: usize) -> Vec<f64> {
        let key = InfosetKey::new(seat, bet.round().index(), a.buckets[pair], a.path);
        let src = if seat == a.spec.resolver { &a.policy } else { &a.opponent };
        src.probs(&key, n).into_owned()
    }

    fn covers(a: &Active, bet: &Betting) -> bool {
        a.root.round() == bet.round()
    }

    /// Brings the tracked hand up to date with `obs`.
    fn sync(&mut self, obs: &Observation<'_>) -> Result<(), Error> {
        let fresh = match &self.hand {
            Some(h) => h.hand_id != obs.hand_id || h.seat != obs.seat || h.holes != obs.holes || h.seen > obs.actions.len(),
            None => true,
        };
        if fresh {
            self.hand = Some(self.start_hand(obs)?);
        }
        let mut h = self.hand.take().expect("tracked hand");
        let r = self.advance(&mut h, obs);
        self.hand = Some(h);
        r
    }

    fn advance(&mut self, h: &mut HandTrack, obs: &Observation<'_>) -> Result<(), Error> {
        self.deal_board(h, &obs.board[..h.bet.board_len().min(obs.board.len())])?;
        while h.seen < obs.actions.len() {
            let a = obs.actions[h.seen];
            self.observe(h, a)?;
            h.seen += 1;
            if h.bet.is_terminal() {
                break;
            }
            let n = h.bet.board_len();
            if n > h.board.len() {
                if obs.board.len() < n {
                    return Err(Error::WrongCardCount { expected: n, got: obs.board.len() });
                }
                self.deal_board(h, &obs.board[..n])?;
            }
        }
        Ok(())
    }

    fn deal_board(&mut self, h: &mut HandTrack, board: &[Card]) -> Result<(), Error> {
        if board.len() == h.board.len() {
            return Ok(());
        }
        h.board = board.to_vec();
        let mask = cards_mask(board);
        for r in h.ranges.iter_mut() {
            let mut next = r.clone();
            if next.block(|p| {
                let (a, b) = pair_cards(p);
                (a.mask() | b.mask()) & mask != 0
            })
            .is_err()
            {
                self.stats.model_violations += 1;
                next = live_range(mask);
            }
            *r = next;
        }
        h.buckets = self.abs.maps[Round::from_board_len(board.len()).ok_or(Error::RoundMismatch)?.index()].board_buckets(board)?;
        h.active = None;
        h.pending = None;
        Ok(())
    }

    /// Snaps a raise to an abstract size within the tolerance.
    fn snap(&self, bet: &Betting, acts: &[AbstractAction], a: Action) -> Action {
        let Action::RaiseTo(x) = a else { return a };
        let tol = self.config.snap_tolerance * bet.pot() as f64;
        for m in acts {
            if let Action::RaiseTo(y) = m.action {
                if (x as f64 - y as f64).abs() <= tol {
                    return m.action;
                }
            }
        }
        a
    }

    fn spec_here(&self, h: &HandTrack) -> HunlSpec {
        let own = h.seat;
        HunlSpec {
            root: h.bet,
            board: h.board.clone(),
            resolver: own,
            own_range: h.ranges[own].clone(),
            opp_range: h.ranges[1 - own].clone(),
            alt: None,
            budget: self.config.budgets[h.bet.round().index()],
            models: self.config.models.clone(),
        }
    }

    fn observe(&mut self, h: &mut HandTrack, observed: Action) -> Result<(), Error> {
        let bet = h.bet;
        let actor = bet.to_act();
        let acts = betting_actions(&bet, &self.abs.menu)?;
        let a = self.snap(&bet, &acts, observed);
        let targets = translate(&bet, a, &self.abs.menu)?;
        let exact = targets.len() == 1 && acts[targets[0].0].action == a;
        let n = acts.len();
        if h.active.as_ref().map_or(true, |x| !Self::covers(x, &bet)) && !h.on_tree && actor != h.seat {
            // no policy covers this opponent decision yet
            self.resolve(h, true)?;
        }
        let next = bet.apply(a)?;
        let seed: u64 = h.rng.gen();
        let mut nested = None;
        let (range, violated) = {
            let probs = |p: usize| -> Vec<f64> {
                match &h.active {
                    Some(x) if Self::covers(x, &bet) => Self::active_probs(x, &bet, actor, p, n),
                    _ => self.blueprint_probs(h, actor, p, n),
                }
            };
            if !exact && !next.is_terminal() && next.round() == bet.round() {
                let current = match &h.active {
                    Some(x) if Self::covers(x, &bet) => HunlSpec { root: bet, alt: Some(Vec::new()), ..x.spec.clone() },
                    _ => HunlSpec { alt: Some(Vec::new()), ..self.spec_here(h) },
                };
                let current = HunlSpec { own_range: h.ranges[h.seat].clone(), opp_range: h.ranges[1 - h.seat].clone(), ..current };
                let (policy, prefix) = match &h.active {
                    Some(x) if Self::covers(x, &bet) => (&x.policy, x.path),
                    _ => (&self.store.policy, h.seq),
                };
                let view = PolicyView { policy, prefix };
                let spec = nested_resolve(self.abs, &current, bet, view, &probs, a, seed)?;
                nested = Some(spec);
            }
            translated_posterior(&h.ranges[actor], &targets, &probs)?
        };
        if violated {
            self.stats.model_violations += 1;
        }
        h.ranges[actor] = range;
        let best = targets.iter().fold(targets[0], |b, t| if t.1 > b.1 { *t } else { b }).0;
        if h.seq.len() < ActionSeq::MAX_LEN {
            h.seq = h.seq.push(best);
        } else {
            h.on_tree = false;
        }
        h.on_tree &= exact;
        if let Some(x) = &mut h.active {
            if exact && Self::covers(x, &bet) {
                x.path = x.path.push(best);
            } else {
                h.active = None;
            }
        }
        h.pending = nested.map(|mut s| {
            s.own_range = h.ranges[h.seat].clone();
            s.opp_range = h.ranges[1 - h.seat].clone();
            s
        });
        h.bet = next;
        if next.round() != bet.round() {
            h.active = None;
        }
        Ok(())
    }

    /// Solves a subgame rooted at the tracked state and makes it active.
    fn resolve(&mut self, h: &mut HandTrack, off_tree: bool) -> Result<(), Error> {
        let seed: u64 = h.rng.gen();
        let spec = match h.pending.take() {
            Some(s) if s.root == h.bet => s,
            _ => {
                let mut s = self.spec_here(h);
                let (policy, prefix) = match &h.active {
                    Some(x) if Self::covers(x, &h.bet) => (&x.policy, x.path),
                    _ => (&self.store.policy, h.seq),
                };
                let view = PolicyView { policy, prefix };
                s.alt = Some(alt_values(self.abs, h.bet, &[], view, &h.board, h.seat, &s.own_range, seed)?);
                s
            }
        };
        let sg = Subgame::new(spec, self.abs, seed)?;
        let solved = sg.solve(seed)?;
        self.stats.resolves.push(ResolveEvent {
            round: h.bet.round(),
            off_tree,
            iterations: solved.iterations,
            min_margin: solved.min_margin(),
        });
        h.active = Some(Active {
            root: h.bet,
            path: ActionSeq::EMPTY,
            policy: solved.policy,
            opponent: solved.opponent,
            buckets: h.buckets.clone(),
            spec: sg.spec,
        });
        Ok(())
    }

    fn decide(&mut self, h: &mut HandTrack) -> Result<Action, Error> {
        let bet = h.bet;
        let acts = betting_actions(&bet, &self.abs.menu)?;
        let n = acts.len();
        let round = bet.round().index();
        let pair = pair_index(h.holes[0], h.holes[1]);
        let probs = if h.on_tree && bet.round() != Round::River {
            self.stats.blueprint_decisions[round] += 1;
            let key = InfosetKey::new(h.seat, round, h.buckets[pair], h.seq);
            let (p, hit) = self.store.query(&key, n);
            if !hit {
                self.stats.blueprint_misses += 1;
            }
            p.into_owned()
        } else {
            let covered = h.active.as_ref().is_some_and(|x| Self::covers(x, &bet));
            if !covered {
                self.resolve(h, !h.on_tree)?;
            }
            self.stats.resolved_decisions[round] += 1;
            if !h.on_tree {
                self.stats.off_tree_decisions[round] += 1;
            }
            Self::active_probs(h.active.as_ref().expect("resolved"), &bet, h.seat, pair, n)
        };
        let i = pick(&probs, self.config.purified, &mut h.rng);
        Ok(acts[i].action)
    }
}

impl Player for Agent<'_> {
    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, Error> {
        self.sync(obs)?;
        let mut h = self.hand.take().expect("tracked hand");
        let r = if h.bet.is_terminal() || h.bet.to_act() != obs.seat {
            Err(Error::InvalidConfig("agent asked to act out of turn"))
        } else {
            self.decide(&mut h)
        };
        self.hand = Some(h);
        r
    }
}

/// Calls or checks every time.
pub struct AlwaysCall;

impl Player for AlwaysCall {
    fn act(&mut self, _obs: &Observation<'_>) -> Result<Action, Error> {
        Ok(Action::Call)
    }
}

/// Folds whenever facing a bet, checks otherwise.
pub struct AlwaysFold;

impl Player for AlwaysFold {
    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, Error> {
        let legal = obs.betting()?.legal_actions()?;
        Ok(if legal.fold { Action::Fold } else { Action::Call })
    }
}

/// Uniformly random legal actions, with raise sizes drawn over the legal interval.
pub struct RandomPlayer {
    rng: ChaCha8Rng,
}

impl RandomPlayer {
    pub fn new(seed: u64) -> RandomPlayer {
        RandomPlayer { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Player for RandomPlayer {
    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, Error> {
        let legal = obs.betting()?.legal_actions()?;
        let mut options = vec![Action::Call];
        if legal.fold {
            options.push(Action::Fold);
        }
        if let Some((lo, hi)) = legal.raise {
            options.push(Action::RaiseTo(self.rng.gen_range(lo..=hi)));
        }
        if legal.all_in {
            options.push(Action::AllIn);
        }
        Ok(options[self.rng.gen_range(0..options.len())])
    }
}
