//! Extensive-form game representations.
//!
//! [`GameTree`] is a fully materialized tree with dense infoset ids, used for
//! the small games where exact traversal is affordable (fixtures, re-solving
//! gadgets). [`Game`] is the lazily-expanded interface the sampling solvers
//! use, which the abstract hold'em game implements without materializing.

use alloc::vec::Vec;

use rand::Rng;
use crate::FxHashMap;

use crate::cfr::InfosetTable;
use crate::error::Error;

/// Sequence of action indices packed three bits at a time below a leading 1 bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionSeq(pub u128);

impl ActionSeq {
    pub const EMPTY: ActionSeq = ActionSeq(1);
    pub const MAX_LEN: usize = 42;

    #[inline]
    pub fn push(self, action: usize) -> ActionSeq {
        debug_assert!(action < 8);
        debug_assert!(self.len() < Self::MAX_LEN);
        ActionSeq((self.0 << 3) | action as u128)
    }

    pub fn len(self) -> usize {
        (127 - self.0.leading_zeros() as usize) / 3
    }

    pub fn is_empty(self) -> bool {
        self.0 == 1
    }

    pub fn to_vec(self) -> Vec<u8> {
        let n = self.len();
        (0..n).map(|i| ((self.0 >> (3 * (n - 1 - i))) & 7) as u8).collect()
    }

    /// `self` followed by the actions of `tail`.
    pub fn concat(self, tail: ActionSeq) -> ActionSeq {
        let n = tail.len();
        ActionSeq((self.0 << (3 * n)) | (tail.0 ^ (1u128 << (3 * n))))
    }

    pub fn from_slice(actions: &[u8]) -> ActionSeq {
        actions.iter().fold(ActionSeq::EMPTY, |s, &a| s.push(a as usize))
    }
}

impl Default for ActionSeq {
    fn default() -> Self {
        ActionSeq::EMPTY
    }
}

/// Identifies an information set: who acts, in which round, with which
/// private-information bucket, after which abstract action sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfosetKey {
    pub player: u8,
    pub round: u8,
    pub bucket: u32,
    pub history: ActionSeq,
}

impl InfosetKey {
    pub fn new(player: usize, round: usize, bucket: u32, history: ActionSeq) -> InfosetKey {
        InfosetKey { player: player as u8, round: round as u8, bucket, history }
    }
}

pub type NodeId = u32;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Payoff to player 0; player 1 receives the negation.
    Terminal(f64),
    Chance(Vec<(f64, NodeId)>),
    Decision { player: u8, infoset: u32, children: Vec<NodeId> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfosetInfo {
    pub key: InfosetKey,
    pub num_actions: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GameTree {
    nodes: Vec<Node>,
    infosets: Vec<InfosetInfo>,
    index: FxHashMap<InfosetKey, u32>,
    root: NodeId,
    fingerprint: u64,
}

impl GameTree {
    pub fn new() -> GameTree {
        GameTree::default()
    }

    pub fn add_terminal(&mut self, payoff_p0: f64) -> NodeId {
        self.push(Node::Terminal(payoff_p0))
    }

    pub fn add_chance(&mut self, outcomes: Vec<(f64, NodeId)>) -> NodeId {
        self.push(Node::Chance(outcomes))
    }

    /// Adds a decision node; nodes sharing `key` must have the same action count.
    pub fn add_decision(&mut self, key: InfosetKey, children: Vec<NodeId>) -> Result<NodeId, Error> {
        let id = match self.index.get(&key) {
            Some(&id) => {
                if self.infosets[id as usize].num_actions != children.len() {
                    return Err(Error::KeyMismatch(alloc::format!("{key:?} action count differs")));
                }
                id
            }
            None => {
                let id = self.infosets.len() as u32;
                self.infosets.push(InfosetInfo { key, num_actions: children.len() });
                self.index.insert(key, id);
                id
            }
        };
        Ok(self.push(Node::Decision { player: key.player, infoset: id, children }))
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        (self.nodes.len() - 1) as NodeId
    }

    /// Marks the tree complete; infosets must not be added afterwards.
    pub fn set_root(&mut self, root: NodeId) {
        self.root = root;
        self.fingerprint = self.compute_fingerprint();
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn infosets(&self) -> &[InfosetInfo] {
        &self.infosets
    }

    pub fn infoset_id(&self, key: &InfosetKey) -> Option<u32> {
        self.index.get(key).copied()
    }

    /// Nodes reachable from the root (builders may leave orphans when they discard subtrees).
    pub fn reachable_nodes(&self) -> usize {
        let mut stack = alloc::vec![self.root];
        let mut n = 0;
        while let Some(id) = stack.pop() {
            n += 1;
            match self.node(id) {
                Node::Terminal(_) => {}
                Node::Chance(o) => stack.extend(o.iter().map(|&(_, c)| c)),
                Node::Decision { children, .. } => stack.extend(children.iter().copied()),
            }
        }
        n
    }

    /// 64-bit hash of the infoset layout, used to check table compatibility.
    pub fn layout_fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn compute_fingerprint(&self) -> u64 {
        let mut h = crate::hash::Fnv64::new();
        for info in &self.infosets {
            h.write_key(&info.key);
            h.write_u64(info.num_actions as u64);
        }
        h.finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeKind {
    Terminal(f64),
    Chance,
    Decision(usize),
}

/// Lazily expanded extensive-form game.
pub trait Game {
    type State: Clone;

    fn root(&self) -> Self::State;
    fn kind(&self, state: &Self::State) -> NodeKind;
    /// Full chance distribution; may be expensive or unsupported for large games.
    fn chance_outcomes(&self, state: &Self::State) -> Result<Vec<(f64, Self::State)>, Error>;
    fn sample_chance<R: Rng>(&self, state: &Self::State, rng: &mut R) -> Self::State;
    fn num_actions(&self, state: &Self::State) -> usize;
    fn child(&self, state: &Self::State, action: usize) -> Self::State;
    fn infoset(&self, state: &Self::State) -> InfosetKey;

    /// Table slot for the infoset at `state`, inserting it when new.
    fn infoset_slot(&self, state: &Self::State, table: &mut InfosetTable) -> Result<usize, Error> {
        table.slot_or_insert(self.infoset(state), self.num_actions(state))
    }

    /// Checks that `table` can be used with this game.
    fn check_table(&self, _table: &InfosetTable) -> Result<(), Error> {
        Ok(())
    }
}

impl Game for GameTree {
    type State = NodeId;

    fn root(&self) -> NodeId {
        self.root
    }

    fn kind(&self, s: &NodeId) -> NodeKind {
        match self.node(*s) {
            Node::Terminal(u) => NodeKind::Terminal(*u),
            Node::Chance(_) => NodeKind::Chance,
            Node::Decision { player, .. } => NodeKind::Decision(*player as usize),
        }
    }

    fn chance_outcomes(&self, s: &NodeId) -> Result<Vec<(f64, NodeId)>, Error> {
        match self.node(*s) {
            Node::Chance(o) => Ok(o.clone()),
            _ => Ok(Vec::new()),
        }
    }

    fn sample_chance<R: Rng>(&self, s: &NodeId, rng: &mut R) -> NodeId {
        let Node::Chance(o) = self.node(*s) else { return *s };
        let total: f64 = o.iter().map(|(p, _)| p).sum();
        let mut x = rng.gen::<f64>() * total;
        for &(p, c) in o {
            if x < p {
                return c;
            }
            x -= p;
        }
        o.last().map(|&(_, c)| c).unwrap_or(*s)
    }

    fn num_actions(&self, s: &NodeId) -> usize {
        match self.node(*s) {
            Node::Decision { children, .. } => children.len(),
            _ => 0,
        }
    }

    fn child(&self, s: &NodeId, a: usize) -> NodeId {
        match self.node(*s) {
            Node::Decision { children, .. } => children[a],
            _ => *s,
        }
    }

    fn infoset(&self, s: &NodeId) -> InfosetKey {
        match self.node(*s) {
            Node::Decision { infoset, .. } => self.infosets[*infoset as usize].key,
            _ => InfosetKey::new(0, 0, 0, ActionSeq::EMPTY),
        }
    }

    #[inline]
    fn infoset_slot(&self, s: &NodeId, _table: &mut InfosetTable) -> Result<usize, Error> {
        match self.node(*s) {
            Node::Decision { infoset, .. } => Ok(*infoset as usize),
            _ => Err(Error::KeyMismatch("not a decision node".into())),
        }
    }

    fn check_table(&self, table: &InfosetTable) -> Result<(), Error> {
        if table.layout() != Some(self.fingerprint) {
            return Err(Error::KeyMismatch("table was not laid out for this tree".into()));
        }
        Ok(())
    }
}
