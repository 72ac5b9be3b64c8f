//! Counterfactual regret minimization.
//!
//! Two traversal schemes share one [`InfosetTable`]: vanilla CFR (full tree,
//! alternating traversers) and external-sampling MCCFR. Linear weighting
//! accumulates the strategy sum with weight `t`; its default regret discount
//! (`alpha = beta = 1`) is realized by weighting iteration `t`'s regrets by `t`,
//! which differs from multiplying accumulated regrets by `t / (t + 1)` only by
//! a common positive factor that regret matching ignores.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use crate::FxHashMap;

use crate::error::Error;
use crate::tree::{Game, GameTree, InfosetKey, NodeKind};

pub const MAX_ACTIONS: usize = 8;

/// Distribution proportional to the positive regrets, uniform when none are positive.
pub fn regret_matching(regrets: &[f64]) -> Result<Vec<f64>, Error> {
    if regrets.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut out = vec![0.0; regrets.len()];
    regret_matching_into(regrets, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn regret_matching_into(regrets: &[f64], out: &mut [f64]) {
    let total: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / total;
        }
    } else {
        let u = 1.0 / regrets.len() as f64;
        out.iter_mut().for_each(|o| *o = u);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Discount {
    /// Regrets accumulate undiscounted.
    None,
    /// After iteration `t`, positive regrets scale by `t^a / (t^a + 1)` and
    /// negative ones by `t^b / (t^b + 1)`.
    Exponents { alpha: f64, beta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weighting {
    Uniform,
    Linear(Discount),
}

impl Weighting {
    pub const LINEAR: Weighting = Weighting::Linear(Discount::Exponents { alpha: 1.0, beta: 1.0 });

    fn strategy_weight(self, t: u64) -> f64 {
        match self {
            Weighting::Uniform => 1.0,
            Weighting::Linear(_) => t as f64,
        }
    }

    fn regret_weight(self, t: u64) -> f64 {
        match self {
            Weighting::Linear(Discount::Exponents { alpha, beta }) if alpha == 1.0 && beta == 1.0 => t as f64,
            _ => 1.0,
        }
    }

    fn eager_discount(self) -> Option<(f64, f64)> {
        match self {
            Weighting::Linear(Discount::Exponents { alpha, beta }) if !(alpha == 1.0 && beta == 1.0) => {
                Some((alpha, beta))
            }
            _ => None,
        }
    }
}

impl core::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Weighting, Error> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "linear" => Ok(Weighting::LINEAR),
            "linear-strategy" => Ok(Weighting::Linear(Discount::None)),
            _ => Err(Error::InvalidConfig("weighting must be uniform, linear or linear-strategy")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Vanilla,
    ExternalSampling,
}

impl core::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant, Error> {
        match s {
            "vanilla" => Ok(Variant::Vanilla),
            "external-sampling" | "es" => Ok(Variant::ExternalSampling),
            _ => Err(Error::InvalidConfig("variant must be vanilla or external-sampling")),
        }
    }
}

/// Cumulative regrets and weighted strategy sums, one dense slot per infoset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InfosetTable {
    index: FxHashMap<InfosetKey, u32>,
    keys: Vec<InfosetKey>,
    offsets: Vec<u32>,
    lens: Vec<u8>,
    regrets: Vec<f64>,
    strategy_sum: Vec<f64>,
    /// Per-slot count of regret updates, for instrumentation.
    updates: Vec<u64>,
    layout: Option<u64>,
}

impl InfosetTable {
    pub fn new() -> InfosetTable {
        InfosetTable::default()
    }

    pub fn with_capacity(infosets: usize, avg_actions: usize) -> InfosetTable {
        let mut t = InfosetTable::default();
        t.index.reserve(infosets);
        t.keys.reserve(infosets);
        t.regrets.reserve(infosets * avg_actions);
        t.strategy_sum.reserve(infosets * avg_actions);
        t
    }

    /// A table whose slots coincide with the tree's dense infoset ids.
    pub fn for_tree(tree: &GameTree) -> InfosetTable {
        let mut t = InfosetTable::with_capacity(tree.infosets().len(), 3);
        for info in tree.infosets() {
            t.slot_or_insert(info.key, info.num_actions).expect("tree infosets are consistent");
        }
        t.layout = Some(tree.layout_fingerprint());
        t
    }

    pub fn layout(&self) -> Option<u64> {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn slot(&self, key: &InfosetKey) -> Option<usize> {
        self.index.get(key).map(|&s| s as usize)
    }

    pub fn slot_or_insert(&mut self, key: InfosetKey, num_actions: usize) -> Result<usize, Error> {
        if let Some(&s) = self.index.get(&key) {
            if self.lens[s as usize] as usize != num_actions {
                return Err(Error::KeyMismatch(alloc::format!("{key:?}")));
            }
            return Ok(s as usize);
        }
        if num_actions == 0 || num_actions > MAX_ACTIONS {
            return Err(Error::KeyMismatch(alloc::format!("{key:?} has {num_actions} actions")));
        }
        let s = self.keys.len();
        self.index.insert(key, s as u32);
        self.keys.push(key);
        self.offsets.push(self.regrets.len() as u32);
        self.lens.push(num_actions as u8);
        self.regrets.extend(core::iter::repeat(0.0).take(num_actions));
        self.strategy_sum.extend(core::iter::repeat(0.0).take(num_actions));
        self.updates.push(0);
        Ok(s)
    }

    pub fn key(&self, slot: usize) -> InfosetKey {
        self.keys[slot]
    }

    /// Appends a slot with saved contents, as when restoring a checkpoint.
    pub fn push_slot(&mut self, key: InfosetKey, regrets: &[f64], strategy_sum: &[f64], updates: u64) -> Result<usize, Error> {
        if regrets.len() != strategy_sum.len() || self.index.contains_key(&key) {
            return Err(Error::KeyMismatch(alloc::format!("{key:?}")));
        }
        let s = self.slot_or_insert(key, regrets.len())?;
        self.regrets_mut(s).copy_from_slice(regrets);
        self.strategy_sum_mut(s).copy_from_slice(strategy_sum);
        self.updates[s] = updates;
        Ok(s)
    }

    #[inline]
    fn range(&self, slot: usize) -> core::ops::Range<usize> {
        let o = self.offsets[slot] as usize;
        o..o + self.lens[slot] as usize
    }

    pub fn regrets(&self, slot: usize) -> &[f64] {
        &self.regrets[self.range(slot)]
    }

    pub fn strategy_sum(&self, slot: usize) -> &[f64] {
        &self.strategy_sum[self.range(slot)]
    }

    pub fn regrets_mut(&mut self, slot: usize) -> &mut [f64] {
        let r = self.range(slot);
        &mut self.regrets[r]
    }

    pub fn strategy_sum_mut(&mut self, slot: usize) -> &mut [f64] {
        let r = self.range(slot);
        &mut self.strategy_sum[r]
    }

    pub fn update_count(&self, slot: usize) -> u64 {
        self.updates[slot]
    }

    #[inline]
    fn current_strategy(&self, slot: usize, out: &mut [f64]) {
        regret_matching_into(self.regrets(slot), out);
    }

    /// Slots ordered by infoset key.
    pub fn sorted_slots(&self) -> Vec<usize> {
        let mut s: Vec<usize> = (0..self.len()).collect();
        s.sort_by_key(|&i| self.keys[i]);
        s
    }

    fn discount(&mut self, t: u64, alpha: f64, beta: f64) {
        let tf = t as f64;
        let pa = libm::pow(tf, alpha);
        let pb = libm::pow(tf, beta);
        let (dp, dn) = (pa / (pa + 1.0), pb / (pb + 1.0));
        for r in &mut self.regrets {
            *r *= if *r > 0.0 { dp } else { dn };
        }
    }
}

/// Per-infoset action distributions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Policy {
    map: FxHashMap<InfosetKey, Vec<f64>>,
}

impl Policy {
    pub fn new() -> Policy {
        Policy::default()
    }

    pub fn insert(&mut self, key: InfosetKey, probs: Vec<f64>) {
        self.map.insert(key, probs);
    }

    pub fn get(&self, key: &InfosetKey) -> Option<&[f64]> {
        self.map.get(key).map(|v| v.as_slice())
    }

    /// Stored distribution, or uniform over `num_actions` when absent.
    pub fn probs(&self, key: &InfosetKey, num_actions: usize) -> Cow<'_, [f64]> {
        match self.map.get(key) {
            Some(v) if v.len() == num_actions => Cow::Borrowed(v.as_slice()),
            _ => Cow::Owned(vec![1.0 / num_actions as f64; num_actions]),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn keys_sorted(&self) -> Vec<InfosetKey> {
        let mut k: Vec<_> = self.map.keys().copied().collect();
        k.sort();
        k
    }

    pub fn iter(&self) -> impl Iterator<Item = (&InfosetKey, &Vec<f64>)> {
        self.map.iter()
    }

    /// Replaces entries with those of `other`.
    pub fn overlay(&mut self, other: &Policy) {
        for (k, v) in other.iter() {
            self.map.insert(*k, v.clone());
        }
    }

    pub fn retain(&mut self, mut f: impl FnMut(&InfosetKey) -> bool) {
        self.map.retain(|k, _| f(k));
    }
}

/// Normalized weighted strategy sums; unvisited infosets get the uniform distribution.
pub fn average_policy(table: &InfosetTable) -> Policy {
    let mut p = Policy::new();
    for slot in 0..table.len() {
        let sums = table.strategy_sum(slot);
        let total: f64 = sums.iter().sum();
        let probs = if total > 0.0 {
            sums.iter().map(|s| s / total).collect()
        } else {
            vec![1.0 / sums.len() as f64; sums.len()]
        };
        p.insert(table.key(slot), probs);
    }
    p
}

/// Current regret-matching policy for every stored infoset.
pub fn current_policy(table: &InfosetTable) -> Policy {
    let mut p = Policy::new();
    for slot in 0..table.len() {
        p.insert(table.key(slot), regret_matching(table.regrets(slot)).expect("non-empty"));
    }
    p
}

/// Runs CFR iteration `t` (1-based) for both players.
pub fn cfr_iterate<G: Game, R: Rng>(
    game: &G,
    table: &mut InfosetTable,
    t: u64,
    variant: Variant,
    weighting: Weighting,
    rng: &mut R,
) -> Result<(), Error> {
    if t == 0 {
        return Err(Error::InvalidConfig("iterations are numbered from 1"));
    }
    game.check_table(table)?;
    match variant {
        Variant::Vanilla => {
            let mut scratch = Scratch::new(table);
            for traverser in 0..2 {
                scratch.clear();
                vanilla(game, table, &mut scratch, &game.root(), traverser, 1.0, 1.0)?;
                scratch.apply(table, traverser, weighting.regret_weight(t), weighting.strategy_weight(t));
            }
        }
        Variant::ExternalSampling => {
            let w = (weighting.regret_weight(t), weighting.strategy_weight(t));
            for traverser in 0..2 {
                external(game, table, &game.root(), traverser, w, rng)?;
            }
        }
    }
    if let Some((a, b)) = weighting.eager_discount() {
        table.discount(t, a, b);
    }
    Ok(())
}

struct Scratch {
    regrets: Vec<f64>,
    strategy: Vec<f64>,
    touched: Vec<bool>,
}

impl Scratch {
    fn new(table: &InfosetTable) -> Scratch {
        Scratch {
            regrets: vec![0.0; table.regrets.len()],
            strategy: vec![0.0; table.regrets.len()],
            touched: vec![false; table.len()],
        }
    }

    fn clear(&mut self) {
        self.regrets.iter_mut().for_each(|x| *x = 0.0);
        self.strategy.iter_mut().for_each(|x| *x = 0.0);
        self.touched.iter_mut().for_each(|x| *x = false);
    }

    fn grow(&mut self, table: &InfosetTable) {
        self.regrets.resize(table.regrets.len(), 0.0);
        self.strategy.resize(table.regrets.len(), 0.0);
        self.touched.resize(table.len(), false);
    }

    fn apply(&self, table: &mut InfosetTable, traverser: usize, wr: f64, ws: f64) {
        for slot in 0..table.len() {
            if !self.touched[slot] || table.keys[slot].player as usize != traverser {
                continue;
            }
            let r = table.range(slot);
            for i in r.clone() {
                table.regrets[i] += wr * self.regrets[i];
                table.strategy_sum[i] += ws * self.strategy[i];
            }
            table.updates[slot] += 1;
        }
    }
}

/// Returns the traverser's expected value; `own` and `others` are the
/// traverser's and everyone else's (including chance) reach probabilities.
fn vanilla<G: Game>(
    game: &G,
    table: &mut InfosetTable,
    scratch: &mut Scratch,
    state: &G::State,
    traverser: usize,
    own: f64,
    others: f64,
) -> Result<f64, Error> {
    match game.kind(state) {
        NodeKind::Terminal(u) => Ok(if traverser == 0 { u } else { -u }),
        NodeKind::Chance => {
            let mut v = 0.0;
            for (p, child) in game.chance_outcomes(state)? {
                v += p * vanilla(game, table, scratch, &child, traverser, own, others * p)?;
            }
            Ok(v)
        }
        NodeKind::Decision(player) => {
            let slot = game.infoset_slot(state, table)?;
            if slot >= scratch.touched.len() {
                scratch.grow(table);
            }
            let n = game.num_actions(state);
            let mut sigma = [0.0; MAX_ACTIONS];
            table.current_strategy(slot, &mut sigma[..n]);
            if player == traverser {
                let mut values = [0.0; MAX_ACTIONS];
                let mut v = 0.0;
                for a in 0..n {
                    let child = game.child(state, a);
                    values[a] = vanilla(game, table, scratch, &child, traverser, own * sigma[a], others)?;
                    v += sigma[a] * values[a];
                }
                let off = table.offsets[slot] as usize;
                for a in 0..n {
                    scratch.regrets[off + a] += others * (values[a] - v);
                    scratch.strategy[off + a] += own * sigma[a];
                }
                scratch.touched[slot] = true;
                Ok(v)
            } else {
                let mut v = 0.0;
                for a in 0..n {
                    // Unreached by the opponent, but the traverser's strategy sums below still count.
                    if sigma[a] == 0.0 && own == 0.0 {
                        continue;
                    }
                    let child = game.child(state, a);
                    v += sigma[a] * vanilla(game, table, scratch, &child, traverser, own, others * sigma[a])?;
                }
                Ok(v)
            }
        }
    }
}

fn external<G: Game, R: Rng>(
    game: &G,
    table: &mut InfosetTable,
    state: &G::State,
    traverser: usize,
    (wr, ws): (f64, f64),
    rng: &mut R,
) -> Result<f64, Error> {
    match game.kind(state) {
        NodeKind::Terminal(u) => Ok(if traverser == 0 { u } else { -u }),
        NodeKind::Chance => {
            let child = game.sample_chance(state, rng);
            external(game, table, &child, traverser, (wr, ws), rng)
        }
        NodeKind::Decision(player) => {
            let slot = game.infoset_slot(state, table)?;
            let n = game.num_actions(state);
            let mut sigma = [0.0; MAX_ACTIONS];
            table.current_strategy(slot, &mut sigma[..n]);
            if player == traverser {
                let mut values = [0.0; MAX_ACTIONS];
                let mut v = 0.0;
                for a in 0..n {
                    let child = game.child(state, a);
                    values[a] = external(game, table, &child, traverser, (wr, ws), rng)?;
                    v += sigma[a] * values[a];
                }
                let r = table.range(slot);
                for (a, i) in r.enumerate() {
                    table.regrets[i] += wr * (values[a] - v);
                }
                table.updates[slot] += 1;
                Ok(v)
            } else {
                let r = table.range(slot);
                for (a, i) in r.enumerate() {
                    table.strategy_sum[i] += ws * sigma[a];
                }
                let mut x = rng.gen::<f64>();
                let mut pick = n - 1;
                for (a, &p) in sigma[..n].iter().enumerate() {
                    if x < p {
                        pick = a;
                        break;
                    }
                    x -= p;
                }
                let child = game.child(state, pick);
                external(game, table, &child, traverser, (wr, ws), rng)
            }
        }
    }
}


#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExploitSample {
    pub iteration: u64,
    pub exploitability: f64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: u64,
    pub elapsed_ms: u64,
    pub samples: Vec<ExploitSample>,
    pub final_exploitability: Option<f64>,
}

/// Position of a solver's random stream, enough to resume it exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngPosition {
    pub seed: [u8; 32],
    pub word_pos: u128,
}

/// Drives repeated [`cfr_iterate`] calls with a deterministic random stream.
pub struct Solver<'g, G: Game> {
    game: &'g G,
    table: InfosetTable,
    iteration: u64,
    variant: Variant,
    weighting: Weighting,
    rng: rand_chacha::ChaCha8Rng,
}

impl<'g, G: Game> Solver<'g, G> {
    pub fn new(game: &'g G, table: InfosetTable, variant: Variant, weighting: Weighting, seed: u64) -> Self {
        use rand::SeedableRng;
        Solver {
            game,
            table,
            iteration: 0,
            variant,
            weighting,
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Continues from a checkpoint taken after `iteration` completed iterations.
    pub fn resume(
        game: &'g G,
        table: InfosetTable,
        iteration: u64,
        rng: RngPosition,
        variant: Variant,
        weighting: Weighting,
    ) -> Self {
        use rand::SeedableRng;
        let mut r = rand_chacha::ChaCha8Rng::from_seed(rng.seed);
        r.set_word_pos(rng.word_pos);
        Solver { game, table, iteration, variant, weighting, rng: r }
    }

    pub fn rng_position(&self) -> RngPosition {
        RngPosition { seed: self.rng.get_seed(), word_pos: self.rng.get_word_pos() }
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn table(&self) -> &InfosetTable {
        &self.table
    }

    pub fn into_table(self) -> InfosetTable {
        self.table
    }

    pub fn step(&mut self) -> Result<(), Error> {
        self.iteration += 1;
        cfr_iterate(self.game, &mut self.table, self.iteration, self.variant, self.weighting, &mut self.rng)
    }

    pub fn run(&mut self, iterations: u64) -> Result<(), Error> {
        for _ in 0..iterations {
            self.step()?;
        }
        Ok(())
    }

    pub fn average_policy(&self) -> Policy {
        average_policy(&self.table)
    }
}

/// Solves an explicit tree, measuring exploitability of the average policy
/// after each iteration listed in `checkpoints`.
pub fn solve_tree(
    tree: &GameTree,
    variant: Variant,
    weighting: Weighting,
    iterations: u64,
    seed: u64,
    checkpoints: &[u64],
) -> Result<(Policy, SolveReport), Error> {
    let mut solver = Solver::new(tree, InfosetTable::for_tree(tree), variant, weighting, seed);
    let mut report = SolveReport::default();
    for t in 1..=iterations {
        solver.step()?;
        if checkpoints.contains(&t) {
            let e = crate::br::exploitability(tree, &solver.average_policy())?;
            report.samples.push(ExploitSample { iteration: t, exploitability: e, elapsed_ms: 0 });
        }
    }
    let policy = solver.average_policy();
    report.iterations = iterations;
    report.final_exploitability = Some(crate::br::exploitability(tree, &policy)?);
    Ok((policy, report))
}
