//! Blueprint training over the abstract game and the strategy store it produces.

use alloc::borrow::Cow;
use alloc::string::String;

use crate::abstraction::profile::{Abstraction, AbstractionProfile};
use crate::cfr::{average_policy, InfosetTable, Policy, RngPosition, SolveReport, Solver, Variant, Weighting};
use crate::error::Error;
use crate::hunl::AbstractHunl;
use crate::game::RulesConfig;
use crate::tree::InfosetKey;

pub const STORE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub profile: String,
    pub variant: Variant,
    pub weighting: Weighting,
    pub iterations: u64,
    /// Iterations between checkpoints; 0 disables them.
    pub checkpoint_interval: u64,
    pub seed: u64,
    pub workers: usize,
    pub rules: RulesConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            profile: "desk".into(),
            variant: Variant::ExternalSampling,
            weighting: Weighting::LINEAR,
            iterations: 1_000_000,
            checkpoint_interval: 0,
            seed: 0,
            workers: 1,
            rules: RulesConfig::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<AbstractionProfile, Error> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("worker count must be positive"));
        }
        if self.variant == Variant::Vanilla {
            return Err(Error::InvalidConfig("hold'em deals can only be sampled; use external-sampling"));
        }
        self.rules.validate()?;
        AbstractionProfile::by_name(&self.profile)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoreHeader {
    pub version: u32,
    pub buckets_fingerprint: u64,
    pub menu_fingerprint: u64,
    pub iterations: u64,
    pub seed: u64,
}

impl StoreHeader {
    pub fn for_abstraction(abs: &Abstraction, iterations: u64, seed: u64) -> StoreHeader {
        StoreHeader {
            version: STORE_VERSION,
            buckets_fingerprint: abs.buckets_fingerprint(),
            menu_fingerprint: abs.menu_fingerprint(),
            iterations,
            seed,
        }
    }

    pub fn check(&self, abs: &Abstraction) -> Result<(), Error> {
        let b = abs.buckets_fingerprint();
        if self.buckets_fingerprint != b {
            return Err(Error::FingerprintMismatch { expected: b, found: self.buckets_fingerprint });
        }
        let m = abs.menu_fingerprint();
        if self.menu_fingerprint != m {
            return Err(Error::FingerprintMismatch { expected: m, found: self.menu_fingerprint });
        }
        Ok(())
    }
}

/// Average strategies of a trained blueprint.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyStore {
    pub header: StoreHeader,
    pub policy: Policy,
}

impl StrategyStore {
    pub fn from_table(table: &InfosetTable, header: StoreHeader) -> StrategyStore {
        StrategyStore { header, policy: average_policy(table) }
    }

    /// Stored distribution and whether the key was present; uniform over
    /// `num_actions` otherwise.
    pub fn query(&self, key: &InfosetKey, num_actions: usize) -> (Cow<'_, [f64]>, bool) {
        let hit = matches!(self.policy.get(key), Some(p) if p.len() == num_actions);
        (self.policy.probs(key, num_actions), hit)
    }

    /// [`StrategyStore::query`] after checking that `abs` is the abstraction the store was trained with.
    pub fn query_checked(&self, abs: &Abstraction, key: &InfosetKey, num_actions: usize) -> Result<(Cow<'_, [f64]>, bool), Error> {
        self.header.check(abs)?;
        Ok(self.query(key, num_actions))
    }
}

/// Training state after a whole number of iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub header: StoreHeader,
    pub rng: RngPosition,
    pub table: InfosetTable,
}

/// Trains `cfg.iterations` in total, continuing from `resume` when given.
/// `on_checkpoint` sees the state every `checkpoint_interval` iterations.
pub fn train(
    cfg: &TrainingConfig,
    abs: &Abstraction,
    resume: Option<Checkpoint>,
    mut on_checkpoint: impl FnMut(&Checkpoint) -> Result<(), Error>,
) -> Result<(StrategyStore, SolveReport), Error> {
    cfg.validate()?;
    let game = AbstractHunl::new(abs, cfg.rules)?;
    let mut solver = match resume {
        Some(ck) => {
            ck.header.check(abs)?;
            if ck.header.seed != cfg.seed {
                return Err(Error::InvalidConfig("checkpoint seed differs from the config"));
            }
            if ck.header.iterations > cfg.iterations {
                return Err(Error::InvalidConfig("checkpoint is past the configured iterations"));
            }
            Solver::resume(&game, ck.table, ck.header.iterations, ck.rng, cfg.variant, cfg.weighting)
        }
        None => Solver::new(&game, InfosetTable::new(), cfg.variant, cfg.weighting, cfg.seed),
    };
    while solver.iteration() < cfg.iterations {
        solver.step()?;
        let t = solver.iteration();
        if cfg.checkpoint_interval > 0 && t % cfg.checkpoint_interval == 0 && t < cfg.iterations {
            let ck = Checkpoint {
                header: StoreHeader::for_abstraction(abs, t, cfg.seed),
                rng: solver.rng_position(),
                table: solver.table().clone(),
            };
            on_checkpoint(&ck)?;
        }
    }
    let header = StoreHeader::for_abstraction(abs, solver.iteration(), cfg.seed);
    let store = StrategyStore::from_table(solver.table(), header);
    let report = SolveReport { iterations: solver.iteration(), ..SolveReport::default() };
    Ok((store, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::buckets::BucketMap;
    use crate::abstraction::menu::ActionMenuConfig;
    use crate::game::Round;

    fn tiny() -> Abstraction {
        let maps = [BucketMap::identity_preflop(), BucketMap::constant(Round::Flop), BucketMap::constant(Round::Turn), BucketMap::constant(Round::River)];
        Abstraction::new(maps, ActionMenuConfig::default()).unwrap()
    }

    fn cfg(iterations: u64) -> TrainingConfig {
        TrainingConfig { iterations, checkpoint_interval: 50, seed: 9, ..TrainingConfig::default() }
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let abs = tiny();
        let mut saved = None;
        let (full, _) = train(&cfg(120), &abs, None, |ck| {
            if ck.header.iterations == 50 {
                saved = Some(ck.clone());
            }
            Ok(())
        })
        .unwrap();
        let (resumed, report) = train(&cfg(120), &abs, saved, |_| Ok(())).unwrap();
        assert_eq!(full, resumed);
        assert_eq!(report.iterations, 120);
        assert_eq!(full.header.iterations, 120);
    }

    #[test]
    fn store_guards_the_abstraction() {
        let abs = tiny();
        let (store, _) = train(&cfg(20), &abs, None, |_| Ok(())).unwrap();
        let mut other = tiny();
        other.menu = ActionMenuConfig { rounds: core::array::from_fn(|_| alloc::vec![crate::abstraction::menu::MenuTier { from_ordinal: 1, entries: alloc::vec![crate::abstraction::menu::MenuEntry::Fold, crate::abstraction::menu::MenuEntry::Call] }]) };
        let key = *store.policy.keys_sorted().first().unwrap();
        assert!(store.query_checked(&abs, &key, store.policy.get(&key).unwrap().len()).is_ok());
        assert!(matches!(store.query_checked(&other, &key, 2), Err(Error::FingerprintMismatch { .. })));
    }

    #[test]
    fn unvisited_keys_are_uniform() {
        let abs = tiny();
        let (store, _) = train(&cfg(5), &abs, None, |_| Ok(())).unwrap();
        let key = InfosetKey::new(0, 3, 999, crate::tree::ActionSeq::from_slice(&[1, 1, 1]));
        let (p, hit) = store.query(&key, 4);
        assert!(!hit);
        assert_eq!(&*p, &[0.25; 4]);
        for (_, p) in store.policy.iter() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9 && p.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        let abs = tiny();
        assert!(train(&TrainingConfig { iterations: 0, ..cfg(1) }, &abs, None, |_| Ok(())).is_err());
        assert!(train(&TrainingConfig { profile: "nope".into(), ..cfg(1) }, &abs, None, |_| Ok(())).is_err());
        assert!(train(&TrainingConfig { variant: Variant::Vanilla, ..cfg(1) }, &abs, None, |_| Ok(())).is_err());
    }
}
