//! The abstract heads-up no-limit game: real betting restricted to the
//! action menu, private information reduced to per-round buckets.

use alloc::vec::Vec;

use rand::Rng;

use crate::abstraction::menu::{betting_actions_into, AbstractAction, ActionMenuConfig, MenuEntry, MAX_MENU};
use crate::abstraction::profile::Abstraction;
use crate::cards::cards_mask;
use crate::error::Error;
use crate::eval::eval_mask;
use crate::game::{Action, Betting, Deal, Round, RulesConfig};
use crate::tree::{ActionSeq, Game, InfosetKey, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HunlState {
    pub bet: Betting,
    /// Menu indices taken so far, across all rounds.
    pub seq: ActionSeq,
    /// `None` before the deal.
    pub deal: Option<Deal>,
    /// Bucket per seat and round.
    pub buckets: [[u32; 4]; 2],
    /// Seat 0's showdown result against seat 1.
    pub showdown: core::cmp::Ordering,
    acts: [AbstractAction; MAX_MENU],
    n_acts: u8,
}

pub struct AbstractHunl<'a> {
    pub abs: &'a Abstraction,
    pub rules: RulesConfig,
}

impl<'a> AbstractHunl<'a> {
    pub fn new(abs: &'a Abstraction, rules: RulesConfig) -> Result<AbstractHunl<'a>, Error> {
        rules.validate()?;
        Ok(AbstractHunl { abs, rules })
    }

    pub fn menu(&self) -> &ActionMenuConfig {
        &self.abs.menu
    }

    /// State after dealing `deal` at the root.
    pub fn dealt(&self, deal: Deal) -> Result<HunlState, Error> {
        let mut buckets = [[0u32; 4]; 2];
        for (seat, row) in buckets.iter_mut().enumerate() {
            for (r, b) in row.iter_mut().enumerate() {
                let n = Round::from_index(r).board_len();
                *b = self.abs.bucket(deal.holes[seat], &deal.board[..n])?;
            }
        }
        let board = cards_mask(&deal.board);
        let showdown = eval_mask(board | cards_mask(&deal.holes[0])).cmp(&eval_mask(board | cards_mask(&deal.holes[1])));
        let mut s = self.root();
        s.deal = Some(deal);
        s.buckets = buckets;
        s.showdown = showdown;
        self.fill_actions(&mut s)?;
        Ok(s)
    }

    fn fill_actions(&self, s: &mut HunlState) -> Result<(), Error> {
        s.n_acts = if s.bet.is_terminal() { 0 } else { betting_actions_into(&s.bet, &self.abs.menu, &mut s.acts)? as u8 };
        Ok(())
    }

    pub fn actions<'s>(&self, s: &'s HunlState) -> &'s [AbstractAction] {
        &s.acts[..s.n_acts as usize]
    }

    /// State after taking menu index `i`.
    pub fn step(&self, s: &HunlState, i: usize) -> Result<HunlState, Error> {
        let a = self.actions(s).get(i).ok_or(Error::OutOfRange)?.action;
        let mut c = *s;
        c.bet = s.bet.apply(a)?;
        c.seq = s.seq.push(i);
        self.fill_actions(&mut c)?;
        Ok(c)
    }

    /// Infoset key for a seat at a betting state and its bucket.
    pub fn key(bet: &Betting, seq: ActionSeq, bucket: u32) -> InfosetKey {
        InfosetKey::new(bet.to_act(), bet.round().index(), bucket, seq)
    }
}

impl Game for AbstractHunl<'_> {
    type State = HunlState;

    fn root(&self) -> HunlState {
        let bet = Betting::new(self.rules).expect("validated rules");
        HunlState {
            bet,
            seq: ActionSeq::EMPTY,
            deal: None,
            buckets: [[0; 4]; 2],
            showdown: core::cmp::Ordering::Equal,
            acts: [AbstractAction { action: Action::Call, label: MenuEntry::Call }; MAX_MENU],
            n_acts: 0,
        }
    }

    fn kind(&self, s: &HunlState) -> NodeKind {
        if s.deal.is_none() {
            return NodeKind::Chance;
        }
        match s.bet.utility(s.showdown) {
            Ok(u) => NodeKind::Terminal(u[0] as f64),
            Err(_) => NodeKind::Decision(s.bet.to_act()),
        }
    }

    fn chance_outcomes(&self, _s: &HunlState) -> Result<Vec<(f64, HunlState)>, Error> {
        Err(Error::InvalidConfig("hold'em deals can only be sampled"))
    }

    fn sample_chance<R: Rng>(&self, _s: &HunlState, rng: &mut R) -> HunlState {
        self.dealt(Deal::from_rng(rng)).expect("random deals are valid")
    }

    fn num_actions(&self, s: &HunlState) -> usize {
        s.n_acts as usize
    }

    fn child(&self, s: &HunlState, action: usize) -> HunlState {
        self.step(s, action).expect("menu actions are legal")
    }

    fn infoset(&self, s: &HunlState) -> InfosetKey {
        let p = s.bet.to_act();
        AbstractHunl::key(&s.bet, s.seq, s.buckets[p][s.bet.round().index()])
    }
}

/// Decision nodes per round in the abstract betting tree, stopping at `limit` in total.
pub fn count_betting_nodes(rules: RulesConfig, menu: &ActionMenuConfig, limit: u64) -> Result<[u64; 4], Error> {
    fn walk(b: &Betting, menu: &ActionMenuConfig, counts: &mut [u64; 4], limit: u64) -> Result<(), Error> {
        if b.is_terminal() || counts.iter().sum::<u64>() >= limit {
            return Ok(());
        }
        counts[b.round().index()] += 1;
        let mut acts = [AbstractAction { action: Action::Call, label: MenuEntry::Call }; MAX_MENU];
        let n = betting_actions_into(b, menu, &mut acts)?;
        for a in &acts[..n] {
            walk(&b.apply(a.action)?, menu, counts, limit)?;
        }
        Ok(())
    }
    let mut counts = [0; 4];
    walk(&Betting::new(rules)?, menu, &mut counts, limit)?;
    Ok(counts)
}
