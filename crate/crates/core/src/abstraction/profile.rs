//! Bundled abstraction: bucket maps for all four rounds plus the action menu.

use alloc::string::String;

use alloc::vec::Vec;

use super::buckets::{BucketMap, BuildConfig};
use super::features::HistogramPolicy;
use super::menu::ActionMenuConfig;
use crate::cards::Card;
use crate::error::Error;
use crate::game::Round;

#[derive(Clone, Debug, PartialEq)]
pub struct AbstractionProfile {
    pub name: String,
    /// Buckets per round: preflop, flop, turn, river.
    pub buckets: [usize; 4],
    pub menu: ActionMenuConfig,
    pub histogram: HistogramPolicy,
    pub build: BuildConfig,
}

impl AbstractionProfile {
    /// Small profile that builds in minutes on one core.
    pub fn desk() -> AbstractionProfile {
        AbstractionProfile {
            name: "desk".into(),
            buckets: [169, 200, 100, 50],
            menu: ActionMenuConfig::default(),
            histogram: HistogramPolicy { rivers_per_turn: Some(4), ..HistogramPolicy::default() },
            build: BuildConfig::default(),
        }
    }

    /// Full-size bucket counts.
    pub fn full() -> AbstractionProfile {
        AbstractionProfile {
            name: "full".into(),
            buckets: [169, 50_000, 5_000, 1_000],
            menu: ActionMenuConfig::default(),
            histogram: HistogramPolicy::default(),
            build: BuildConfig { fit_boards: 5_000, ..BuildConfig::default() },
        }
    }

    /// One bucket on the flop and turn, a few on the river; for smoke runs.
    pub fn tiny() -> AbstractionProfile {
        AbstractionProfile { name: "tiny".into(), buckets: [169, 1, 1, 8], ..AbstractionProfile::desk() }
    }

    pub fn by_name(name: &str) -> Result<AbstractionProfile, Error> {
        match name {
            "tiny" => Ok(AbstractionProfile::tiny()),
            "desk" => Ok(AbstractionProfile::desk()),
            "full" => Ok(AbstractionProfile::full()),
            _ => Err(Error::InvalidConfig("unknown abstraction profile")),
        }
    }
}

/// Live abstraction used by training and play.
pub struct Abstraction {
    pub maps: [BucketMap; 4],
    pub menu: ActionMenuConfig,
}

impl Abstraction {
    pub fn new(maps: [BucketMap; 4], menu: ActionMenuConfig) -> Result<Abstraction, Error> {
        for (i, m) in maps.iter().enumerate() {
            if m.round.index() != i {
                return Err(Error::RoundMismatch);
            }
        }
        menu.validate()?;
        Ok(Abstraction { maps, menu })
    }

    /// Builds every round's map for `profile` with `seed`. Postflop rounds
    /// with a single bucket get a constant map.
    pub fn build(profile: &AbstractionProfile, seed: u64) -> Result<Abstraction, Error> {
        let m = |r: usize| match (r, profile.buckets[r]) {
            (1..=3, 1) => Ok(BucketMap::constant(Round::from_index(r))),
            (_, k) => BucketMap::build(Round::from_index(r), k, &profile.histogram, seed.wrapping_add(r as u64), &profile.build),
        };
        Abstraction::new([m(0)?, m(1)?, m(2)?, m(3)?], profile.menu.clone())
    }

    pub fn bucket(&self, holes: [Card; 2], board: &[Card]) -> Result<u32, Error> {
        let round = Round::from_board_len(board.len()).ok_or(Error::WrongCardCount { expected: 5, got: board.len() })?;
        self.maps[round.index()].bucket_of(holes, board)
    }

    /// Buckets of all 1326 pairs on `board`.
    pub fn board_buckets(&self, board: &[Card]) -> Result<Vec<u32>, Error> {
        let round = Round::from_board_len(board.len()).ok_or(Error::WrongCardCount { expected: 5, got: board.len() })?;
        self.maps[round.index()].board_buckets(board)
    }

    /// Hash over the four bucket-map fingerprints.
    pub fn buckets_fingerprint(&self) -> u64 {
        let mut h = crate::hash::Fnv64::new();
        for m in &self.maps {
            h.write_u64(m.fingerprint());
        }
        h.finish()
    }

    pub fn menu_fingerprint(&self) -> u64 {
        self.menu.fingerprint()
    }
}
