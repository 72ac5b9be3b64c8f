//! Head-to-head matches between players, with duplicate replays.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{Observation, Player};
use crate::error::Error;
use crate::game::{Action, Deal, DealSource, GameState, RulesConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct HandRecord {
    pub hand_id: u64,
    pub deal: Deal,
    /// Which match player sat in each seat.
    pub seats: [usize; 2],
    pub actions: Vec<Action>,
    /// Net chips per seat.
    pub net: [i64; 2],
    /// Seat that broke protocol, if any; the hand was scored as its fold.
    pub violation: Option<usize>,
}

/// Plays one hand; `players[s]` sits in seat `s`.
pub fn play_hand(players: [&mut dyn Player; 2], hand_id: u64, deal: Deal, seats: [usize; 2], rules: RulesConfig) -> Result<HandRecord, Error> {
    let mut state = GameState::new_hand(rules, DealSource::Explicit(deal))?;
    let mut actions = Vec::new();
    while !state.is_terminal() {
        let seat = state.to_act();
        let obs = Observation { hand_id, seat, holes: state.holes(seat), board: state.board(), actions: &actions, rules };
        let chosen = players[seat].act(&obs);
        let next = chosen.and_then(|a| state.apply(a).map(|s| (a, s)));
        match next {
            Ok((a, s)) => {
                actions.push(a);
                state = s;
            }
            Err(_) => {
                let lost = state.committed()[seat] as i64;
                let mut net = [lost, lost];
                net[seat] = -lost;
                return Ok(HandRecord { hand_id, deal, seats, actions, net, violation: Some(seat) });
            }
        }
    }
    let net = state.terminal_utility()?;
    Ok(HandRecord { hand_id, deal, seats, actions, net, violation: None })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchStats {
    pub hands: u64,
    /// Chips won by the first player.
    pub total_chips: i64,
    pub mbb_per_hand: f64,
    pub std_error: f64,
}

pub fn mbb_per_hand(chips: f64, hands: u64, big_blind: u32) -> f64 {
    chips / hands as f64 / big_blind as f64 * 1000.0
}

/// Stats for the first player from per-unit chip results, each unit worth
/// `hands_per_unit` hands (2 for duplicate pairs).
pub fn match_stats(units: &[i64], hands_per_unit: u64, big_blind: u32) -> MatchStats {
    let hands = units.len() as u64 * hands_per_unit;
    let total: i64 = units.iter().sum();
    let per_hand: Vec<f64> = units.iter().map(|&u| u as f64 / hands_per_unit as f64).collect();
    let n = per_hand.len() as f64;
    let mean = if n > 0.0 { per_hand.iter().sum::<f64>() / n } else { 0.0 };
    let var = if n > 1.0 { per_hand.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let se = libm::sqrt(var / n.max(1.0));
    MatchStats {
        hands,
        total_chips: total,
        mbb_per_hand: if hands > 0 { mbb_per_hand(total as f64, hands, big_blind) } else { 0.0 },
        std_error: se / big_blind as f64 * 1000.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub stats: MatchStats,
    pub records: Vec<HandRecord>,
    pub violations: [u64; 2],
}

/// Plays `hands` hands between `a` (player 0) and `b` (player 1). Without
/// duplicate, seats alternate each hand; with it, each deal is played twice
/// with the players swapped and `hands` must be even.
pub fn run_match(a: &mut dyn Player, b: &mut dyn Player, hands: u64, seed: u64, duplicate: bool, rules: RulesConfig) -> Result<MatchResult, Error> {
    if hands == 0 {
        return Err(Error::InvalidConfig("a match needs at least one hand"));
    }
    if duplicate && hands % 2 == 1 {
        return Err(Error::InvalidConfig("duplicate matches need an even number of hands"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut units = Vec::new();
    let mut violations = [0u64; 2];
    let mut play = |id: u64, deal: Deal, a_seat: usize, a: &mut dyn Player, b: &mut dyn Player, records: &mut Vec<HandRecord>| -> Result<i64, Error> {
        let rec = if a_seat == 0 { play_hand([a, b], id, deal, [0, 1], rules)? } else { play_hand([b, a], id, deal, [1, 0], rules)? };
        if let Some(s) = rec.violation {
            violations[rec.seats[s]] += 1;
        }
        let won = rec.net[a_seat];
        records.push(rec);
        Ok(won)
    };
    if duplicate {
        for d in 0..hands / 2 {
            let deal = Deal::from_rng(&mut rng);
            let x = play(2 * d, deal, 0, a, b, &mut records)?;
            let y = play(2 * d + 1, deal, 1, a, b, &mut records)?;
            units.push(x + y);
        }
    } else {
        for h in 0..hands {
            let deal = Deal::from_rng(&mut rng);
            units.push(play(h, deal, (h % 2) as usize, a, b, &mut records)?);
        }
    }
    let stats = match_stats(&units, if duplicate { 2 } else { 1 }, rules.big_blind);
    Ok(MatchResult { stats, records, violations })
}
