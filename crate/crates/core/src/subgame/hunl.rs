//! Re-solving hold'em subgames.
//!
//! A subgame spans the rest of the current betting round; on the river it
//! runs to showdown. The gadget is solved by external-sampling CFR over
//! sampled hands and runouts, with private information reduced to the
//! abstraction's buckets for the round. Opponent values used for safety
//! (alternative values, achieved values, margins) come from exact per-pair
//! vector walks instead.
//!
//! Leaves at the end of a non-river round are valued by scripted
//! continuations: check down to showdown, and with probability
//! [`CONTINUATION_SHIFT`] either fold, call, or bet the pot and get called,
//! depending on the continuation's action class. The opponent picks the
//! continuation at each leaf.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use super::{entry_weights, model_choices, ActionClass, AuditRow, Continuation, OpponentModel, Range, RangeTransform, CONTINUATION_SHIFT};
use crate::abstraction::menu::{betting_actions_into, AbstractAction, ActionMenuConfig, MenuEntry, MAX_MENU};
use crate::abstraction::profile::Abstraction;
use crate::cards::{cards_mask, pair_cards, Card, NUM_PAIRS};
use crate::cfr::{InfosetTable, Policy, Solver, Variant, Weighting};
use crate::error::Error;
use crate::eval::eval_mask;
use crate::game::{Action, Betting, Outcome};
use crate::tree::{ActionSeq, Game, InfosetKey, NodeKind};

pub const ROUND_GADGET: u8 = 200;
pub const ROUND_LEAF: u8 = 201;
pub const ROUND_MODEL: u8 = 202;

/// Runouts sampled when a subgame's remaining board has too many completions.
pub const SAMPLED_RUNOUTS: usize = 64;

/// Everything needed to re-solve from a public state.
#[derive(Clone, Debug, PartialEq)]
pub struct HunlSpec {
    pub root: Betting,
    /// Board cards visible at the root.
    pub board: Vec<Card>,
    pub resolver: usize,
    pub own_range: Range,
    pub opp_range: Range,
    /// Opponent's net chips per pair for declining the subgame; `None` re-solves unsafely.
    pub alt: Option<Vec<f64>>,
    pub budget: u64,
    pub models: Vec<OpponentModel>,
}

/// An own-policy source for vector walks: keys are `prefix` followed by the
/// subgame-relative sequence.
#[derive(Clone, Copy)]
pub struct PolicyView<'a> {
    pub policy: &'a Policy,
    pub prefix: ActionSeq,
}

impl PolicyView<'_> {
    fn key(&self, bet: &Betting, seq: ActionSeq, bucket: u32) -> InfosetKey {
        InfosetKey::new(bet.to_act(), bet.round().index(), bucket, self.prefix.concat(seq))
    }
}

#[inline]
fn pair_mask(p: usize) -> u64 {
    let (a, b) = pair_cards(p);
    a.mask() | b.mask()
}

#[inline]
fn pair_card_ids(p: usize) -> (usize, usize) {
    let (a, b) = pair_cards(p);
    (a.index() as usize, b.index() as usize)
}

/// Final boards over which showdowns are averaged.
#[derive(Clone, Debug)]
struct Runouts {
    ranks: Vec<Vec<u32>>,
    /// Pairs disjoint from each board, sorted by rank.
    order: Vec<Vec<u16>>,
    /// Weight of one board in a per-matchup average.
    scale: f64,
}

fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Runouts {
    fn new(board: &[Card], seed: u64) -> Runouts {
        let known = cards_mask(board);
        let k = 5 - board.len();
        let deck: Vec<u8> = (0..52u8).filter(|c| known >> c & 1 == 0).collect();
        let mut boards = Vec::new();
        let total = choose(deck.len() as u64, k as u64);
        if k == 0 {
            boards.push(known);
        } else if k == 1 {
            boards.extend(deck.iter().map(|&c| known | 1u64 << c));
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ known);
            let mut d = deck.clone();
            for _ in 0..SAMPLED_RUNOUTS {
                d.partial_shuffle(&mut rng, k);
                boards.push(known | d[..k].iter().fold(0u64, |m, &c| m | 1u64 << c));
            }
        }
        // chance that a board misses four given cards
        let n = deck.len() as u64;
        let q = choose(n - 4, k as u64) / total;
        let scale = 1.0 / (boards.len() as f64 * q);
        let mut ranks = Vec::with_capacity(boards.len());
        let mut order = Vec::with_capacity(boards.len());
        for &b in &boards {
            let mut r = vec![0u32; NUM_PAIRS];
            let mut o = Vec::with_capacity(NUM_PAIRS);
            for p in 0..NUM_PAIRS {
                let m = pair_mask(p);
                if m & b == 0 {
                    r[p] = eval_mask(b | m).0;
                    o.push(p as u16);
                }
            }
            o.sort_by_key(|&p| r[p as usize]);
            ranks.push(r);
            order.push(o);
        }
        Runouts { ranks, order, scale }
    }

    /// For each pair x: average over runouts of Σ_y w[y]·sign(x vs y), over disjoint y.
    fn showdown_sums(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; NUM_PAIRS];
        for (ranks, order) in self.ranks.iter().zip(&self.order) {
            showdown_pass(ranks, order, w, self.scale, &mut out);
        }
        out
    }
}

/// Adds `scale`·Σ_y w[y]·sign(rank x − rank y) over y disjoint from x, for x in `order`.
fn showdown_pass(ranks: &[u32], order: &[u16], w: &[f64], scale: f64, out: &mut [f64]) {
    let mut total = 0.0;
    let mut card_total = [0.0f64; 52];
    for &p in order {
        let p = p as usize;
        let (a, b) = pair_card_ids(p);
        total += w[p];
        card_total[a] += w[p];
        card_total[b] += w[p];
    }
    let mut lower = 0.0;
    let mut lower_card = [0.0f64; 52];
    let mut g = 0;
    while g < order.len() {
        let r = ranks[order[g] as usize];
        let mut end = g;
        let mut group = 0.0;
        let mut group_card = [0.0f64; 52];
        let mut touched: Vec<usize> = Vec::new();
        while end < order.len() && ranks[order[end] as usize] == r {
            let p = order[end] as usize;
            let (a, b) = pair_card_ids(p);
            group += w[p];
            group_card[a] += w[p];
            group_card[b] += w[p];
            touched.push(a);
            touched.push(b);
            end += 1;
        }
        for &x in &order[g..end] {
            let x = x as usize;
            let (a, b) = pair_card_ids(x);
            let below = lower - lower_card[a] - lower_card[b];
            let equal = group - group_card[a] - group_card[b] + w[x];
            let all = total - card_total[a] - card_total[b] + w[x];
            out[x] += scale * (2.0 * below + equal - all);
        }
        lower += group;
        for c in touched {
            lower_card[c] += group_card[c];
            group_card[c] = 0.0;
        }
        g = end;
    }
}

/// For each pair x: Σ_y w[y] over pairs y disjoint from x.
fn disjoint_sums(w: &[f64]) -> Vec<f64> {
    let mut total = 0.0;
    let mut card_total = [0.0f64; 52];
    for (p, &x) in w.iter().enumerate() {
        if x != 0.0 {
            let (a, b) = pair_card_ids(p);
            total += x;
            card_total[a] += x;
            card_total[b] += x;
        }
    }
    (0..NUM_PAIRS)
        .map(|p| {
            let (a, b) = pair_card_ids(p);
            total - card_total[a] - card_total[b] + w[p]
        })
        .collect()
}

/// Own payoff for a showdown sign `s` (own perspective) under a continuation,
/// at a closed round where both seats have `stake` committed.
fn continuation_value(c: Continuation, stake: f64, big_stake: f64, s: f64) -> f64 {
    let shift = CONTINUATION_SHIFT;
    match c {
        Continuation::Blueprint | Continuation::Biased(ActionClass::Call) => stake * s,
        Continuation::Biased(ActionClass::Fold) => (1.0 - shift) * stake * s + shift * stake,
        Continuation::Biased(ActionClass::Raise) => (1.0 - shift) * stake * s + shift * big_stake * s,
    }
}

fn stakes(bet: &Betting) -> (f64, f64) {
    let c = bet.committed();
    let stake = c[0].min(c[1]);
    let big = (3 * stake).min(bet.config().starting_stack);
    (stake as f64, big as f64)
}

fn cdf(w: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    w.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn sample_cdf<R: Rng>(cdf: &[f64], rng: &mut R) -> usize {
    let x = rng.gen::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Stage {
    Models,
    DealOpp,
    Gadget,
    DealOwn,
    Play,
    Done(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct ResolveState {
    stage: Stage,
    tag: u8,
    opp: u16,
    own: u16,
    bet: Betting,
    seq: ActionSeq,
    runout: u64,
    acts: [AbstractAction; MAX_MENU],
    n_acts: u8,
}

/// A validated subgame with everything precomputed for solving and auditing.
pub struct Subgame<'a> {
    pub spec: HunlSpec,
    menu: &'a ActionMenuConfig,
    /// Bucket per pair in the root round.
    buckets: Vec<u32>,
    transforms: Vec<RangeTransform>,
    conts: Vec<Continuation>,
    opp_cdfs: Vec<Vec<f64>>,
    own_cdf: Vec<f64>,
    board_mask: u64,
    runouts: Runouts,
}

impl<'a> Subgame<'a> {
    pub fn new(spec: HunlSpec, abs: &'a Abstraction, seed: u64) -> Result<Subgame<'a>, Error> {
        if spec.budget == 0 {
            return Err(Error::InvalidSpec("budget must be positive"));
        }
        let (transforms, conts) = model_choices(&spec.models)?;
        if spec.root.is_terminal() {
            return Err(Error::TerminalState);
        }
        if spec.board.len() != spec.root.board_len() {
            return Err(Error::InvalidSpec("board does not match the root round"));
        }
        if spec.resolver > 1 || spec.own_range.len() != NUM_PAIRS || spec.opp_range.len() != NUM_PAIRS {
            return Err(Error::InvalidSpec("ranges must cover all 1326 pairs"));
        }
        crate::cards::check_distinct(&spec.board)?;
        let board_mask = cards_mask(&spec.board);
        let mut opp_cdfs = Vec::new();
        for t in &transforms {
            let mut r = t.apply(&spec.opp_range)?;
            r.block(|p| pair_mask(p) & board_mask != 0)?;
            opp_cdfs.push(if spec.alt.is_some() { cdf(&entry_weights(&r.weights)) } else { cdf(&r.weights) });
        }
        let mut own = spec.own_range.clone();
        own.block(|p| pair_mask(p) & board_mask != 0)?;
        if let Some(alt) = &spec.alt {
            if alt.len() != NUM_PAIRS {
                return Err(Error::InvalidSpec("alt values must cover all 1326 pairs"));
            }
            if spec.opp_range.weights.iter().zip(alt).any(|(&w, a)| w > 0.0 && !a.is_finite()) {
                return Err(Error::InvalidSpec("alt values must cover the opponent range"));
            }
        }
        let buckets = abs.maps[spec.root.round().index()].board_buckets(&spec.board)?;
        let runouts = Runouts::new(&spec.board, seed);
        Ok(Subgame {
            own_cdf: cdf(&own.weights),
            spec,
            menu: &abs.menu,
            buckets,
            transforms,
            conts,
            opp_cdfs,
            board_mask,
            runouts,
        })
    }

    fn opp(&self) -> usize {
        1 - self.spec.resolver
    }

    fn tagged(&self) -> bool {
        self.transforms.len() > 1
    }

    fn is_leaf(&self, bet: &Betting) -> bool {
        !bet.is_terminal() && bet.round() != self.spec.root.round()
    }

    fn fill(&self, s: &mut ResolveState) {
        s.n_acts = if s.bet.is_terminal() || self.is_leaf(&s.bet) {
            0
        } else {
            betting_actions_into(&s.bet, self.menu, &mut s.acts).expect("live state") as u8
        };
    }

    /// Player-0 value at a leaf under continuation `c`.
    fn leaf_value(&self, s: &ResolveState, c: Continuation) -> f64 {
        let own = self.spec.resolver;
        let sign = self.own_sign(s);
        let (stake, big) = stakes(&s.bet);
        let v = continuation_value(c, stake, big, sign);
        if own == 0 { v } else { -v }
    }

    fn own_sign(&self, s: &ResolveState) -> f64 {
        let a = eval_mask(s.runout | pair_mask(s.own as usize));
        let b = eval_mask(s.runout | pair_mask(s.opp as usize));
        match a.cmp(&b) {
            core::cmp::Ordering::Greater => 1.0,
            core::cmp::Ordering::Less => -1.0,
            core::cmp::Ordering::Equal => 0.0,
        }
    }

    fn opp_bucket(&self, s: &ResolveState, b: u32) -> u32 {
        if self.tagged() { b | (s.tag as u32) << 16 } else { b }
    }

    /// Abstract actions at a subgame state reached from the root by `path` menu indices.
    pub fn actions_at(&self, path: &[u8]) -> Result<(Betting, Vec<AbstractAction>), Error> {
        let mut bet = self.spec.root;
        for &i in path {
            let acts = crate::abstraction::menu::betting_actions(&bet, self.menu)?;
            bet = bet.apply(acts.get(i as usize).ok_or(Error::OutOfRange)?.action)?;
        }
        let acts = if bet.is_terminal() || self.is_leaf(&bet) { Vec::new() } else { crate::abstraction::menu::betting_actions(&bet, self.menu)? };
        Ok((bet, acts))
    }

    pub fn bucket(&self, pair: usize) -> u32 {
        self.buckets[pair]
    }

    /// Opponent's counterfactual best-response value per pair (net chips)
    /// when the resolver plays `view` from the root with `own` reach weights.
    /// NaN for pairs no own hand can coexist with.
    pub fn opp_values(&self, view: PolicyView<'_>, own: &[f64]) -> Result<Vec<f64>, Error> {
        self.opp_values_at(view, own, self.spec.root, ActionSeq::EMPTY)
    }

    /// [`Subgame::opp_values`] from a state below the root reached by `seq`,
    /// with `own` the reach weights there.
    pub fn opp_values_at(&self, view: PolicyView<'_>, own: &[f64], at: Betting, seq: ActionSeq) -> Result<Vec<f64>, Error> {
        let mut reach: Vec<f64> = own.to_vec();
        for (p, w) in reach.iter_mut().enumerate() {
            if pair_mask(p) & self.board_mask != 0 {
                *w = 0.0;
            }
        }
        let norm = disjoint_sums(&reach);
        let v = self.walk(&view, at, seq, &reach)?;
        Ok(v.into_iter()
            .zip(norm)
            .enumerate()
            .map(|(p, (x, n))| if n > 0.0 && pair_mask(p) & self.board_mask == 0 { x / n } else { f64::NAN })
            .collect())
    }

    fn walk(&self, view: &PolicyView<'_>, bet: Betting, seq: ActionSeq, reach: &[f64]) -> Result<Vec<f64>, Error> {
        let own = self.spec.resolver;
        let opp = self.opp();
        if let Some(out) = bet.outcome() {
            let c = bet.committed();
            return Ok(match out {
                Outcome::Fold { folder } => {
                    let d = disjoint_sums(reach);
                    let v = if folder == own { c[own] as f64 } else { -(c[opp] as f64) };
                    d.into_iter().map(|x| v * x).collect()
                }
                Outcome::Showdown => {
                    let stake = c[0].min(c[1]) as f64;
                    self.runouts.showdown_sums(reach).into_iter().map(|x| stake * x).collect()
                }
            });
        }
        if self.is_leaf(&bet) {
            let s = self.runouts.showdown_sums(reach);
            let d = disjoint_sums(reach);
            let (stake, big) = stakes(&bet);
            let mut best = vec![f64::NEG_INFINITY; NUM_PAIRS];
            for &c in &self.conts {
                // own payoff is affine in the own sign, which is minus the opponent's
                let own_0 = continuation_value(c, stake, big, 0.0);
                let slope = continuation_value(c, stake, big, 1.0) - own_0;
                for j in 0..NUM_PAIRS {
                    let v = slope * s[j] - own_0 * d[j];
                    if v > best[j] {
                        best[j] = v;
                    }
                }
            }
            return Ok(best);
        }
        let mut acts = [AbstractAction { action: Action::Call, label: MenuEntry::Call }; MAX_MENU];
        let n = betting_actions_into(&bet, self.menu, &mut acts)?;
        if bet.to_act() == opp {
            let mut best = vec![f64::NEG_INFINITY; NUM_PAIRS];
            for (i, a) in acts[..n].iter().enumerate() {
                let v = self.walk(view, bet.apply(a.action)?, seq.push(i), reach)?;
                for (b, x) in best.iter_mut().zip(v) {
                    if x > *b {
                        *b = x;
                    }
                }
            }
            return Ok(best);
        }
        let mut per_bucket: Vec<Option<Vec<f64>>> = Vec::new();
        let mut total = vec![0.0; NUM_PAIRS];
        let mut child = vec![0.0; NUM_PAIRS];
        for (i, a) in acts[..n].iter().enumerate() {
            for p in 0..NUM_PAIRS {
                if reach[p] == 0.0 {
                    child[p] = 0.0;
                    continue;
                }
                let b = self.buckets[p] as usize;
                if per_bucket.len() <= b {
                    per_bucket.resize(b + 1, None);
                }
                let probs = per_bucket[b].get_or_insert_with(|| view.policy.probs(&view.key(&bet, seq, b as u32), n).into_owned());
                child[p] = reach[p] * probs[i];
            }
            if child.iter().all(|&x| x == 0.0) {
                continue;
            }
            let v = self.walk(view, bet.apply(a.action)?, seq.push(i), &child)?;
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
        }
        Ok(total)
    }

    /// Runs the budgeted solve and audits the result against the alternative values.
    pub fn solve(&self, seed: u64) -> Result<HunlResolved, Error> {
        let mut solver = Solver::new(self, InfosetTable::new(), Variant::ExternalSampling, Weighting::LINEAR, seed);
        solver.run(self.spec.budget)?;
        let mut policy = solver.average_policy();
        let own = self.spec.resolver as u8;
        let mut opponent = policy.clone();
        opponent.retain(|k| k.player != own && k.round < ROUND_GADGET);
        policy.retain(|k| k.player == own && k.round < ROUND_GADGET);
        let achieved = self.opp_values(PolicyView { policy: &policy, prefix: ActionSeq::EMPTY }, &self.spec.own_range.weights)?;
        let mut margins = vec![f64::NAN; NUM_PAIRS];
        let mut audit = Vec::new();
        if let Some(alt) = &self.spec.alt {
            for (j, &w) in self.spec.opp_range.weights.iter().enumerate() {
                if w > 0.0 && achieved[j].is_finite() {
                    margins[j] = alt[j] - achieved[j];
                    audit.push(AuditRow { hand: j, weight: w, alt: alt[j], achieved: achieved[j], margin: margins[j] });
                }
            }
        }
        Ok(HunlResolved { policy, opponent, margins, audit, iterations: solver.iteration() })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HunlResolved {
    /// Resolver strategy keyed by (round, bucket, subgame-relative sequence).
    pub policy: Policy,
    /// Opponent strategy the solve converged against; keys of the first
    /// range model coincide with untagged ones.
    pub opponent: Policy,
    pub margins: Vec<f64>,
    pub audit: Vec<AuditRow>,
    pub iterations: u64,
}

impl HunlResolved {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().filter(|m| !m.is_nan()).cloned().fold(f64::INFINITY, f64::min)
    }
}

impl Game for Subgame<'_> {
    type State = ResolveState;

    fn root(&self) -> ResolveState {
        ResolveState {
            stage: if self.tagged() { Stage::Models } else { Stage::DealOpp },
            tag: 0,
            opp: 0,
            own: 0,
            bet: self.spec.root,
            seq: ActionSeq::EMPTY,
            runout: self.board_mask,
            acts: [AbstractAction { action: Action::Call, label: MenuEntry::Call }; MAX_MENU],
            n_acts: 0,
        }
    }

    fn kind(&self, s: &ResolveState) -> NodeKind {
        match s.stage {
            Stage::Models | Stage::Gadget => NodeKind::Decision(self.opp()),
            Stage::DealOpp | Stage::DealOwn => NodeKind::Chance,
            Stage::Done(v) => NodeKind::Terminal(v),
            Stage::Play => {
                if s.bet.is_terminal() {
                    let sign = self.own_sign(s);
                    let ord = if (sign > 0.0) == (self.spec.resolver == 0) { core::cmp::Ordering::Greater } else { core::cmp::Ordering::Less };
                    let ord = if sign == 0.0 { core::cmp::Ordering::Equal } else { ord };
                    NodeKind::Terminal(s.bet.utility(ord).expect("terminal")[0] as f64)
                } else if self.is_leaf(&s.bet) {
                    if self.conts.len() == 1 {
                        NodeKind::Terminal(self.leaf_value(s, self.conts[0]))
                    } else {
                        NodeKind::Decision(self.opp())
                    }
                } else {
                    NodeKind::Decision(s.bet.to_act())
                }
            }
        }
    }

    fn chance_outcomes(&self, _s: &ResolveState) -> Result<Vec<(f64, ResolveState)>, Error> {
        Err(Error::InvalidConfig("subgame deals can only be sampled"))
    }

    fn sample_chance<R: Rng>(&self, s: &ResolveState, rng: &mut R) -> ResolveState {
        let mut c = *s;
        match s.stage {
            Stage::DealOpp => {
                c.opp = sample_cdf(&self.opp_cdfs[s.tag as usize], rng) as u16;
                c.stage = if self.spec.alt.is_some() { Stage::Gadget } else { Stage::DealOwn };
                if c.stage == Stage::DealOwn {
                    return self.sample_chance(&c, rng);
                }
            }
            Stage::DealOwn => {
                let block = pair_mask(s.opp as usize);
                let mut own = None;
                for _ in 0..64 {
                    let i = sample_cdf(&self.own_cdf, rng);
                    if pair_mask(i) & block == 0 {
                        own = Some(i);
                        break;
                    }
                }
                let own = own.unwrap_or_else(|| {
                    let w: Vec<f64> = (0..NUM_PAIRS)
                        .map(|p| {
                            let prev = if p == 0 { 0.0 } else { self.own_cdf[p - 1] };
                            if pair_mask(p) & block == 0 { self.own_cdf[p] - prev } else { 0.0 }
                        })
                        .collect();
                    sample_cdf(&cdf(&w), rng)
                });
                c.own = own as u16;
                let used = self.board_mask | block | pair_mask(own);
                let mut runout = self.board_mask;
                let mut need = 5 - self.spec.board.len();
                while need > 0 {
                    let card = rng.gen_range(0..52u8);
                    if (used | runout) >> card & 1 == 0 {
                        runout |= 1u64 << card;
                        need -= 1;
                    }
                }
                c.runout = runout;
                c.stage = Stage::Play;
                self.fill(&mut c);
            }
            _ => {}
        }
        c
    }

    fn num_actions(&self, s: &ResolveState) -> usize {
        match s.stage {
            Stage::Models => self.transforms.len(),
            Stage::Gadget => 2,
            Stage::Play if self.is_leaf(&s.bet) => self.conts.len(),
            Stage::Play => s.n_acts as usize,
            _ => 0,
        }
    }

    fn child(&self, s: &ResolveState, action: usize) -> ResolveState {
        let mut c = *s;
        match s.stage {
            Stage::Models => {
                c.tag = action as u8;
                c.stage = Stage::DealOpp;
            }
            Stage::Gadget => {
                if action == 0 {
                    let alt = self.spec.alt.as_ref().expect("gadget has alt values")[s.opp as usize];
                    c.stage = Stage::Done(if self.opp() == 0 { alt } else { -alt });
                } else {
                    c.stage = Stage::DealOwn;
                }
            }
            Stage::Play if self.is_leaf(&s.bet) => {
                c.stage = Stage::Done(self.leaf_value(s, self.conts[action]));
            }
            Stage::Play => {
                c.bet = s.bet.apply(s.acts[action].action).expect("menu actions are legal");
                c.seq = s.seq.push(action);
                self.fill(&mut c);
            }
            _ => unreachable!("no actions at chance or terminal stages"),
        }
        c
    }

    fn infoset(&self, s: &ResolveState) -> InfosetKey {
        let opp = self.opp();
        match s.stage {
            Stage::Models => InfosetKey::new(opp, ROUND_MODEL as usize, 0, ActionSeq::EMPTY),
            Stage::Gadget => InfosetKey::new(opp, ROUND_GADGET as usize, s.opp as u32 | (s.tag as u32) << 16, ActionSeq::EMPTY),
            Stage::Play if self.is_leaf(&s.bet) => {
                InfosetKey::new(opp, ROUND_LEAF as usize, self.opp_bucket(s, self.buckets[s.opp as usize]), s.seq)
            }
            _ => {
                let p = s.bet.to_act();
                let b = if p == opp { self.opp_bucket(s, self.buckets[s.opp as usize]) } else { self.buckets[s.own as usize] };
                InfosetKey::new(p, s.bet.round().index(), b, s.seq)
            }
        }
    }
}

/// Opponent alternative values per pair at `root`, or, when `targets` is
/// non-empty, the best for the opponent over those abstract children of
/// `root`. `view` covers `root`.
pub fn alt_values(
    abs: &Abstraction,
    root: Betting,
    targets: &[usize],
    view: PolicyView<'_>,
    board: &[Card],
    resolver: usize,
    own: &Range,
    seed: u64,
) -> Result<Vec<f64>, Error> {
    let spec = HunlSpec {
        root,
        board: board.to_vec(),
        resolver,
        own_range: own.clone(),
        opp_range: Range::uniform(NUM_PAIRS),
        alt: None,
        budget: 1,
        models: vec![OpponentModel::identity()],
    };
    let sg = Subgame::new(spec, abs, seed)?;
    if targets.is_empty() {
        return sg.opp_values(view, &own.weights);
    }
    let acts = crate::abstraction::menu::betting_actions(&root, &abs.menu)?;
    let mut best = vec![f64::NAN; NUM_PAIRS];
    for &t in targets {
        let a = acts.get(t).ok_or(Error::OutOfRange)?;
        let v = sg.opp_values_at(view, &own.weights, root.apply(a.action)?, ActionSeq::EMPTY.push(t))?;
        for (b, x) in best.iter_mut().zip(v) {
            if b.is_nan() || x > *b {
                *b = x;
            }
        }
    }
    Ok(best)
}

/// Posterior of `prior` after the holder took a translated action: the
/// translation-weighted mixture of per-target posteriors. `probs(pair)` is
/// the holder's distribution over the abstract actions. Falls back to the
/// uniform range over the support when every target has zero mass; the flag
/// reports that.
pub fn translated_posterior(prior: &Range, targets: &[(usize, f64)], probs: &dyn Fn(usize) -> Vec<f64>) -> Result<(Range, bool), Error> {
    let table: Vec<Vec<f64>> = (0..prior.len()).map(|p| if prior.weights[p] > 0.0 { probs(p) } else { Vec::new() }).collect();
    let mut mix = vec![0.0; prior.len()];
    let mut used = 0.0;
    for &(t, w) in targets {
        let post: Vec<f64> = prior.weights.iter().zip(&table).map(|(&x, pr)| if x > 0.0 { x * pr.get(t).copied().unwrap_or(0.0) } else { 0.0 }).collect();
        let mass: f64 = post.iter().sum();
        if mass > 0.0 {
            for (m, x) in mix.iter_mut().zip(post) {
                *m += w * x / mass;
            }
            used += w;
        }
    }
    if used > 0.0 {
        return Ok((Range::from_weights(mix)?, false));
    }
    let support = prior.weights.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect();
    Ok((Range::from_weights(support)?, true))
}

/// Spec for re-solving after `observed` was taken at `node` inside the
/// subgame `current`: ranges carried through the translated update, alt
/// values from the translated siblings under `view`, which covers `node`.
pub fn nested_resolve(
    abs: &Abstraction,
    current: &HunlSpec,
    node: Betting,
    view: PolicyView<'_>,
    actor_probs: &dyn Fn(usize) -> Vec<f64>,
    observed: Action,
    seed: u64,
) -> Result<HunlSpec, Error> {
    let targets = crate::abstraction::menu::translate(&node, observed, &abs.menu)?;
    let root = node.apply(observed)?;
    if root.is_terminal() || root.round() != node.round() {
        return Err(Error::InvalidSpec("nested subgames start inside the current round"));
    }
    let mut spec = current.clone();
    spec.root = root;
    if node.to_act() == current.resolver {
        spec.own_range = translated_posterior(&current.own_range, &targets, actor_probs)?.0;
    } else {
        spec.opp_range = translated_posterior(&current.opp_range, &targets, actor_probs)?.0;
    }
    if current.alt.is_some() {
        let idx: Vec<usize> = targets.iter().map(|t| t.0).collect();
        spec.alt = Some(alt_values(abs, node, &idx, view, &current.board, current.resolver, &current.own_range, seed)?);
    }
    Ok(spec)
}
