//! Exact best responses on explicit trees.
//!
//! Values are accumulated reach-weighted: a terminal contributes its payoff
//! times the probability that chance and the fixed player reach it. Responder
//! infosets are resolved on demand; by perfect recall every infoset below a
//! responder node lies strictly deeper, so the recursion terminates.

use alloc::vec;
use alloc::vec::Vec;

use crate::cfr::Policy;
use crate::error::Error;
use crate::tree::{GameTree, Node, NodeId};

pub const DEFAULT_NODE_LIMIT: usize = 20_000_000;

/// Dense per-infoset distributions for `tree`, uniform where `policy` has no entry.
pub fn dense_policy(tree: &GameTree, policy: &Policy) -> Result<Vec<Vec<f64>>, Error> {
    tree.infosets()
        .iter()
        .map(|info| match policy.get(&info.key) {
            Some(p) if p.len() != info.num_actions => {
                Err(Error::KeyMismatch(alloc::format!("{:?} has {} actions", info.key, info.num_actions)))
            }
            Some(p) => Ok(p.to_vec()),
            None => Ok(vec![1.0 / info.num_actions as f64; info.num_actions]),
        })
        .collect()
}

struct Walk<'a> {
    tree: &'a GameTree,
    responder: usize,
    reach: Vec<f64>,
    value: Vec<Option<f64>>,
    choice: Vec<Option<usize>>,
    members: Vec<Vec<NodeId>>,
}

impl<'a> Walk<'a> {
    fn new(tree: &'a GameTree, policy: &'a [Vec<f64>], responder: usize) -> Walk<'a> {
        let n = tree.num_nodes();
        let mut w = Walk {
            tree,
            responder,
            reach: vec![0.0; n],
            value: vec![None; n],
            choice: vec![None; tree.infosets().len()],
            members: vec![Vec::new(); tree.infosets().len()],
        };
        let mut stack = vec![(tree.root(), 1.0)];
        while let Some((id, r)) = stack.pop() {
            w.reach[id as usize] = r;
            match tree.node(id) {
                Node::Terminal(_) => {}
                Node::Chance(o) => stack.extend(o.iter().map(|&(p, c)| (c, r * p))),
                Node::Decision { player, infoset, children } => {
                    if *player as usize == responder {
                        w.members[*infoset as usize].push(id);
                        stack.extend(children.iter().map(|&c| (c, r)));
                    } else {
                        let sigma = &policy[*infoset as usize];
                        stack.extend(children.iter().zip(sigma).map(|(&c, &p)| (c, r * p)));
                    }
                }
            }
        }
        w
    }

    fn value(&mut self, id: NodeId) -> f64 {
        if let Some(v) = self.value[id as usize] {
            return v;
        }
        let v = match self.tree.node(id) {
            Node::Terminal(u) => {
                let u = if self.responder == 0 { *u } else { -*u };
                self.reach[id as usize] * u
            }
            Node::Chance(o) => o.iter().map(|&(_, c)| c).collect::<Vec<_>>().into_iter().map(|c| self.value(c)).sum(),
            Node::Decision { player, infoset, children } => {
                let children = children.clone();
                if *player as usize == self.responder {
                    let a = self.resolve(*infoset as usize);
                    self.value(children[a])
                } else {
                    children.into_iter().map(|c| self.value(c)).sum()
                }
            }
        };
        self.value[id as usize] = Some(v);
        v
    }

    /// Picks the responder's best action at an infoset; lowest index wins ties.
    fn resolve(&mut self, infoset: usize) -> usize {
        if let Some(a) = self.choice[infoset] {
            return a;
        }
        let n = self.tree.infosets()[infoset].num_actions;
        let mut totals = vec![0.0; n];
        for h in self.members[infoset].clone() {
            let Node::Decision { children, .. } = self.tree.node(h) else { unreachable!() };
            let children = children.clone();
            for (a, c) in children.into_iter().enumerate() {
                totals[a] += self.value(c);
            }
        }
        let mut best = 0;
        for a in 1..n {
            if totals[a] > totals[best] {
                best = a;
            }
        }
        self.choice[infoset] = Some(best);
        best
    }
}

fn check_size(tree: &GameTree, limit: usize) -> Result<(), Error> {
    if tree.num_nodes() > limit {
        return Err(Error::TreeTooLarge { limit });
    }
    Ok(())
}

/// Best-response value for `responder` against `policy`, with the pure response.
pub fn best_response(tree: &GameTree, policy: &Policy, responder: usize) -> Result<(f64, Policy), Error> {
    best_response_limited(tree, policy, responder, DEFAULT_NODE_LIMIT)
}

pub fn best_response_limited(
    tree: &GameTree,
    policy: &Policy,
    responder: usize,
    node_limit: usize,
) -> Result<(f64, Policy), Error> {
    check_size(tree, node_limit)?;
    let dense = dense_policy(tree, policy)?;
    let mut walk = Walk::new(tree, &dense, responder);
    let v = walk.value(tree.root());
    let mut response = Policy::new();
    for (i, info) in tree.infosets().iter().enumerate() {
        if info.key.player as usize != responder {
            continue;
        }
        let a = walk.resolve(i);
        let mut probs = vec![0.0; info.num_actions];
        probs[a] = 1.0;
        response.insert(info.key, probs);
    }
    Ok((v, response))
}

/// Best-response value only, from a dense policy.
pub fn best_response_value(tree: &GameTree, dense: &[Vec<f64>], responder: usize) -> f64 {
    Walk::new(tree, dense, responder).value(tree.root())
}

/// Mean of the two best-response values; zero exactly at equilibrium.
pub fn exploitability(tree: &GameTree, policy: &Policy) -> Result<f64, Error> {
    check_size(tree, DEFAULT_NODE_LIMIT)?;
    let dense = dense_policy(tree, policy)?;
    Ok(exploitability_dense(tree, &dense))
}

pub fn exploitability_dense(tree: &GameTree, dense: &[Vec<f64>]) -> f64 {
    (best_response_value(tree, dense, 0) + best_response_value(tree, dense, 1)) / 2.0
}

/// Expected payoff to player 0 when both play `policy`.
pub fn expected_value(tree: &GameTree, policy: &Policy) -> Result<f64, Error> {
    let dense = dense_policy(tree, policy)?;
    Ok(expected_value_dense(tree, &dense, tree.root()))
}

pub fn expected_value_dense(tree: &GameTree, dense: &[Vec<f64>], node: NodeId) -> f64 {
    match tree.node(node) {
        Node::Terminal(u) => *u,
        Node::Chance(o) => o.iter().map(|&(p, c)| p * expected_value_dense(tree, dense, c)).sum(),
        Node::Decision { infoset, children, .. } => children
            .iter()
            .zip(&dense[*infoset as usize])
            .filter(|(_, &p)| p > 0.0)
            .map(|(&c, &p)| p * expected_value_dense(tree, dense, c))
            .sum(),
    }
}
