//! Resolve gadgets on Leduc hold'em, where every quantity is exact.

use alloc::vec;
use alloc::vec::Vec;

use super::{entry_weights, model_choices, ActionClass, AuditRow, Continuation, OpponentModel, Range};
use crate::br::{best_response_value, dense_policy};
use crate::cfr::{InfosetTable, Policy, Solver, Variant, Weighting};
use crate::error::Error;
use crate::fixtures::{leduc_deal_prob, leduc_public_prob, leduc_subtree, LeducEnd, LeducPublic, CALL, FOLD};
use crate::tree::{GameTree, InfosetKey, NodeId};

pub const HANDS: usize = 3;

const ROUND_GADGET: u8 = 200;
const ROUND_LEAF: u8 = 201;
const ROUND_MODEL: u8 = 202;

#[derive(Clone, Debug, PartialEq)]
pub struct LeducSpec {
    /// Public decision state the subgame starts at.
    pub root: LeducPublic,
    /// The re-solving player.
    pub resolver: usize,
    /// Resolver's reach by private rank.
    pub own_range: Range,
    /// Opponent's baseline range by private rank.
    pub opp_range: Range,
    /// Normalized per-hand values the opponent secures by not entering;
    /// `None` disables the gadget (unsafe re-solving).
    pub alt: Option<Vec<f64>>,
    /// Cut the subgame at the end of the first betting round.
    pub depth_limited: bool,
    pub budget: u64,
    pub models: Vec<OpponentModel>,
}

fn cards(resolver: usize, own: usize, opp: usize) -> [u8; 2] {
    let mut c = [0u8; 2];
    c[resolver] = own as u8;
    c[1 - resolver] = opp as u8;
    c
}

/// Chance probability of a rank pair reaching `s` (deal and, later, the public card).
fn chance(s: &LeducPublic, c: [u8; 2]) -> f64 {
    let p = leduc_deal_prob(c);
    match s.public_card {
        Some(pc) => p * leduc_public_prob(c, pc),
        None => p,
    }
}

/// Public states along `s`'s history, each with the label taken there.
fn path(s: &LeducPublic) -> Result<Vec<(LeducPublic, u8)>, Error> {
    let labels = s.history.to_vec();
    let mut cur = LeducPublic::root();
    let mut out = Vec::with_capacity(labels.len());
    for l in labels {
        if cur.end == Some(LeducEnd::RoundOver) {
            cur = cur.deal_public(s.public_card.ok_or(Error::UnreachableHistory)?);
        }
        if !cur.actions().contains(&(l as u8)) {
            return Err(Error::UnreachableHistory);
        }
        out.push((cur, l as u8));
        cur = cur.apply(l as u8);
    }
    if cur.end == Some(LeducEnd::RoundOver) && s.round == 1 {
        cur = cur.deal_public(s.public_card.ok_or(Error::UnreachableHistory)?);
    }
    if cur != *s {
        return Err(Error::UnreachableHistory);
    }
    Ok(out)
}

/// Probability that `player` holding each rank plays to `s` under `policy`.
pub fn reach(policy: &Policy, s: &LeducPublic, player: usize) -> Result<Vec<f64>, Error> {
    let steps = path(s)?;
    Ok((0..HANDS)
        .map(|h| {
            steps
                .iter()
                .filter(|(st, _)| st.to_act as usize == player)
                .map(|(st, l)| {
                    let acts = st.actions();
                    let probs = policy.probs(&st.key(player, h as u8), acts.len());
                    let i = acts.iter().position(|a| a == l).expect("validated label");
                    probs[i]
                })
                .product()
        })
        .collect())
}

/// Builds a spec at `root` from a blueprint, with safe alternative values.
pub fn spec_from_blueprint(
    blueprint: &Policy,
    root: LeducPublic,
    resolver: usize,
    depth_limited: bool,
    budget: u64,
    models: Vec<OpponentModel>,
) -> Result<LeducSpec, Error> {
    if root.end.is_some() {
        return Err(Error::InvalidSpec("subgame root must be a decision"));
    }
    let own = reach(blueprint, &root, resolver)?;
    let opp = reach(blueprint, &root, 1 - resolver)?;
    let mut belief = vec![0.0; HANDS];
    for (j, b) in belief.iter_mut().enumerate() {
        *b = opp[j] * (0..HANDS).map(|i| chance(&root, cards(resolver, i, j)) * own[i]).sum::<f64>();
    }
    let own_range = Range::from_weights(own).map_err(|_| Error::UnreachableHistory)?;
    let opp_range = Range::from_weights(belief).map_err(|_| Error::UnreachableHistory)?;
    let alt = blueprint_alt_values(blueprint, &root, resolver, &own_range)?;
    Ok(LeducSpec { root, resolver, own_range, opp_range, alt: Some(alt), depth_limited, budget, models })
}

/// Conditional chance over the resolver's ranks given the opponent holds `j`.
fn own_given(root: &LeducPublic, resolver: usize, own: &Range, j: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..HANDS).map(|i| chance(root, cards(resolver, i, j)) * own.weights[i]).collect();
    let z: f64 = w.iter().sum();
    if z > 0.0 { w.into_iter().map(|x| x / z).collect() } else { w }
}

/// The opponent's best-response counterfactual value per rank inside the
/// subgame at `root` against `policy`, normalized by the chance and
/// resolver reach of arriving there. Unreachable ranks get `NaN`.
pub fn counterfactual_br_values(policy: &Policy, root: &LeducPublic, resolver: usize, own: &Range) -> Result<Vec<f64>, Error> {
    let opp = 1 - resolver;
    let mut out = vec![f64::NAN; HANDS];
    for (j, o) in out.iter_mut().enumerate() {
        let given = own_given(root, resolver, own, j);
        if given.iter().all(|&p| p == 0.0) {
            continue;
        }
        let mut t = GameTree::new();
        let mut kids = Vec::new();
        for (i, &p) in given.iter().enumerate() {
            if p > 0.0 {
                kids.push((p, leduc_subtree(&mut t, root, cards(resolver, i, j), &mut |_, _, _| None)));
            }
        }
        let r = t.add_chance(kids);
        t.set_root(r);
        let dense = dense_policy(&t, policy)?;
        *o = best_response_value(&t, &dense, opp);
    }
    Ok(out)
}

/// Alternative values: the opponent's best response to the blueprint in the subgame.
pub fn blueprint_alt_values(blueprint: &Policy, root: &LeducPublic, resolver: usize, own: &Range) -> Result<Vec<f64>, Error> {
    path(root)?;
    counterfactual_br_values(blueprint, root, resolver, own)
}

fn classes(s: &LeducPublic) -> Vec<ActionClass> {
    s.actions()
        .into_iter()
        .map(|a| match a {
            FOLD => ActionClass::Fold,
            CALL => ActionClass::Call,
            _ => ActionClass::Raise,
        })
        .collect()
}

/// Value to player 0 of continuing from `s` with the resolver on the
/// blueprint and the opponent on continuation `c`.
pub fn continuation_value(blueprint: &Policy, s: &LeducPublic, c: [u8; 2], opp: usize, cont: Continuation) -> f64 {
    match s.end {
        Some(LeducEnd::RoundOver) => (0..3u8)
            .map(|pc| (pc, leduc_public_prob(c, pc)))
            .filter(|&(_, p)| p > 0.0)
            .map(|(pc, p)| p * continuation_value(blueprint, &s.deal_public(pc), c, opp, cont))
            .sum(),
        Some(_) => s.payoff(c),
        None => {
            let p = s.to_act as usize;
            let acts = s.actions();
            let base = policy_probs(blueprint, &s.key(p, c[p]), acts.len());
            let probs = if p == opp { cont.apply(&base, &classes(s)) } else { base };
            acts.iter().zip(probs).filter(|(_, q)| *q > 0.0).map(|(&a, q)| q * continuation_value(blueprint, &s.apply(a), c, opp, cont)).sum()
        }
    }
}

fn policy_probs(p: &Policy, key: &InfosetKey, n: usize) -> Vec<f64> {
    p.probs(key, n).into_owned()
}

/// Bookkeeping for a built gadget.
#[derive(Clone, Debug)]
pub struct Gadget {
    pub tree: GameTree,
    /// Opponent ranks that can enter.
    pub hands: Vec<usize>,
}

fn tag_key(k: InfosetKey, tag: usize) -> InfosetKey {
    InfosetKey { bucket: k.bucket | ((tag as u32) << 16), ..k }
}

/// Builds the resolve gadget for `spec`. Depth-limit leaves need the
/// blueprint to value continuations.
pub fn build_gadget(spec: &LeducSpec, blueprint: &Policy) -> Result<Gadget, Error> {
    if spec.budget == 0 {
        return Err(Error::InvalidSpec("budget must be positive"));
    }
    if spec.root.end.is_some() {
        return Err(Error::InvalidSpec("subgame root must be a decision"));
    }
    let (transforms, conts) = model_choices(&spec.models)?;
    let opp = 1 - spec.resolver;
    let mut t = GameTree::new();
    let mut hands = Vec::new();
    let mut branches = Vec::new();
    for (m, tr) in transforms.iter().enumerate() {
        let range = tr.apply(&spec.opp_range)?;
        // model tags only appear when there is a choice, so a single model keeps full-game keys
        let tag = if transforms.len() > 1 { m + 1 } else { 0 };
        let mut deals = Vec::new();
        for j in 0..HANDS {
            let given = own_given(&spec.root, spec.resolver, &spec.own_range, j);
            if range.weights[j] == 0.0 || given.iter().all(|&p| p == 0.0) {
                continue;
            }
            if m == 0 {
                hands.push(j);
            }
            let mut kids = Vec::new();
            for (i, &p) in given.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let c = cards(spec.resolver, i, j);
                let mut leaf = |t: &mut GameTree, s: &LeducPublic, c: [u8; 2]| -> Option<NodeId> {
                    if !spec.depth_limited {
                        return None;
                    }
                    let outs: Vec<NodeId> = conts.iter().map(|&k| t.add_terminal(continuation_value(blueprint, s, c, opp, k))).collect();
                    if outs.len() == 1 {
                        return Some(outs[0]);
                    }
                    let key = InfosetKey { round: ROUND_LEAF, ..tag_key(s.key(opp, c[opp]), tag) };
                    Some(t.add_decision(key, outs).expect("leaf arity is fixed"))
                };
                kids.push((p, tagged_subtree(&mut t, &spec.root, c, opp, tag, &mut leaf)?));
            }
            let enter = t.add_chance(kids);
            let node = match &spec.alt {
                Some(alt) => {
                    let a = alt[j];
                    let payoff = if opp == 0 { a } else { -a };
                    let term = t.add_terminal(payoff);
                    let key = InfosetKey { round: ROUND_GADGET, ..tag_key(spec.root.key(opp, j as u8), tag) };
                    t.add_decision(key, vec![term, enter])?
                }
                None => enter,
            };
            deals.push((range.weights[j], node));
        }
        if spec.alt.is_some() {
            let w = entry_weights(&deals.iter().map(|d| d.0).collect::<Vec<_>>());
            deals.iter_mut().zip(w).for_each(|(d, w)| d.0 = w);
        }
        branches.push(t.add_chance(deals));
    }
    let root = if branches.len() == 1 {
        branches[0]
    } else {
        let key = InfosetKey { round: ROUND_MODEL, ..spec.root.key(opp, 0) };
        let key = InfosetKey { bucket: 0, ..key };
        t.add_decision(key, branches)?
    };
    t.set_root(root);
    Ok(Gadget { tree: t, hands })
}

/// Subtree below `s` for fixed ranks, with opponent keys tagged by model.
fn tagged_subtree<F>(t: &mut GameTree, s: &LeducPublic, c: [u8; 2], opp: usize, tag: usize, leaf: &mut F) -> Result<NodeId, Error>
where
    F: FnMut(&mut GameTree, &LeducPublic, [u8; 2]) -> Option<NodeId>,
{
    match s.end {
        Some(LeducEnd::RoundOver) => {
            if let Some(n) = leaf(t, s, c) {
                return Ok(n);
            }
            let mut outcomes = Vec::new();
            for pc in 0..3u8 {
                let p = leduc_public_prob(c, pc);
                if p > 0.0 {
                    outcomes.push((p, tagged_subtree(t, &s.deal_public(pc), c, opp, tag, leaf)?));
                }
            }
            Ok(t.add_chance(outcomes))
        }
        Some(_) => Ok(t.add_terminal(s.payoff(c))),
        None => {
            let mut children = Vec::new();
            for a in s.actions() {
                children.push(tagged_subtree(t, &s.apply(a), c, opp, tag, leaf)?);
            }
            let p = s.to_act as usize;
            let key = if p == opp { tag_key(s.key(p, c[p]), tag) } else { s.key(p, c[p]) };
            t.add_decision(key, children)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    /// Re-solved strategy at the resolver's infosets inside the subgame trunk.
    pub policy: Policy,
    /// Alternative value minus the opponent's achieved best-response value, per opponent rank.
    pub margins: Vec<f64>,
    pub audit: Vec<AuditRow>,
}

/// Solves the gadget with linear CFR for `spec.budget` iterations.
pub fn solve_depth_limited(spec: &LeducSpec, blueprint: &Policy, seed: u64) -> Result<Resolved, Error> {
    let g = build_gadget(spec, blueprint)?;
    let mut solver = Solver::new(&g.tree, InfosetTable::for_tree(&g.tree), Variant::Vanilla, Weighting::LINEAR, seed);
    solver.run(spec.budget)?;
    let avg = solver.average_policy();
    let mut policy = Policy::new();
    for (k, p) in avg.iter() {
        if k.player as usize == spec.resolver && k.round < ROUND_GADGET {
            policy.insert(*k, p.clone());
        }
    }
    let mut combined = blueprint.clone();
    combined.overlay(&policy);
    let achieved = counterfactual_br_values(&combined, &spec.root, spec.resolver, &spec.own_range)?;
    let alt = match &spec.alt {
        Some(a) => a.clone(),
        None => blueprint_alt_values(blueprint, &spec.root, spec.resolver, &spec.own_range)?,
    };
    let mut margins = vec![f64::NAN; HANDS];
    let mut audit = Vec::new();
    for &j in &g.hands {
        margins[j] = alt[j] - achieved[j];
        audit.push(AuditRow { hand: j, weight: spec.opp_range.weights[j], alt: alt[j], achieved: achieved[j], margin: margins[j] });
    }
    Ok(Resolved { policy, margins, audit })
}

/// The resolver's worst-case value in the gadget for a given strategy.
pub fn guaranteed_value(g: &Gadget, resolver: usize, policy: &Policy) -> Result<f64, Error> {
    let dense = dense_policy(&g.tree, policy)?;
    Ok(-best_response_value(&g.tree, &dense, 1 - resolver))
}
