//! Per-round action menus and off-tree action translation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;
use crate::game::{Action, Betting, Chips, GameState, Round};

/// One abstract action. Pot fractions are in thousandths of the pot after a call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MenuEntry {
    Fold,
    Call,
    Pot(u32),
    AllIn,
}

impl fmt::Display for MenuEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MenuEntry::Fold => write!(f, "F"),
            MenuEntry::Call => write!(f, "C"),
            MenuEntry::Pot(1000) => write!(f, "P"),
            MenuEntry::Pot(x) if x % 1000 == 0 => write!(f, "{}P", x / 1000),
            MenuEntry::Pot(x) => {
                let mut frac = x % 1000;
                let mut digits = 3;
                while frac % 10 == 0 {
                    frac /= 10;
                    digits -= 1;
                }
                write!(f, "{}.{:0w$}P", x / 1000, frac, w = digits)
            }
            MenuEntry::AllIn => write!(f, "A"),
        }
    }
}

impl FromStr for MenuEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "F" => Ok(MenuEntry::Fold),
            "C" => Ok(MenuEntry::Call),
            "A" => Ok(MenuEntry::AllIn),
            "P" => Ok(MenuEntry::Pot(1000)),
            _ => {
                let x = s.strip_suffix('P').ok_or(Error::InvalidConfig("menu entry"))?;
                let (int, frac) = x.split_once('.').unwrap_or((x, ""));
                if frac.len() > 3 {
                    return Err(Error::InvalidConfig("menu entry precision"));
                }
                let i: u32 = int.parse().map_err(|_| Error::InvalidConfig("menu entry"))?;
                let mut f: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| Error::InvalidConfig("menu entry"))? };
                for _ in frac.len()..3 {
                    f *= 10;
                }
                match i * 1000 + f {
                    0 => Err(Error::InvalidConfig("zero pot fraction")),
                    v => Ok(MenuEntry::Pot(v)),
                }
            }
        }
    }
}

/// Menu in force from `from_ordinal` (1-based) until the next tier.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MenuTier {
    pub from_ordinal: u8,
    pub entries: Vec<MenuEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActionMenuConfig {
    /// Tiers per round (preflop, flop, turn, river), sorted by `from_ordinal`.
    pub rounds: [Vec<MenuTier>; 4],
}

fn parse_menu(s: &str) -> Vec<MenuEntry> {
    s.split(',').map(|e| e.parse().expect("static menu")).collect()
}

impl Default for ActionMenuConfig {
    fn default() -> Self {
        let tiers = vec![
            MenuTier { from_ordinal: 1, entries: parse_menu("F,C,0.5P,P,2P,4P,A") },
            MenuTier { from_ordinal: 3, entries: parse_menu("F,C,P,2P,4P,A") },
            MenuTier { from_ordinal: 6, entries: parse_menu("F,C,A") },
        ];
        ActionMenuConfig { rounds: [tiers.clone(), tiers.clone(), tiers.clone(), tiers] }
    }
}

impl ActionMenuConfig {
    pub fn validate(&self) -> Result<(), Error> {
        for tiers in &self.rounds {
            if tiers.first().map(|t| t.from_ordinal) != Some(1) {
                return Err(Error::InvalidConfig("menu must start at ordinal 1"));
            }
            if tiers.iter().any(|t| t.entries.len() > MAX_MENU) {
                return Err(Error::InvalidConfig("menu tier too long"));
            }
            if tiers.windows(2).any(|w| w[0].from_ordinal >= w[1].from_ordinal) {
                return Err(Error::InvalidConfig("menu tiers out of order"));
            }
            for t in tiers {
                if !t.entries.contains(&MenuEntry::Call) {
                    return Err(Error::InvalidConfig("menu tier without call"));
                }
            }
        }
        Ok(())
    }

    /// Entries offered at the `ordinal`-th action (1-based) of `round`.
    pub fn menu(&self, round: Round, ordinal: usize) -> &[MenuEntry] {
        let tiers = &self.rounds[round.index().min(3)];
        let t = tiers.iter().rev().find(|t| t.from_ordinal as usize <= ordinal).unwrap_or(&tiers[0]);
        &t.entries
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::hash::Fnv64::new();
        for tiers in &self.rounds {
            h.write_u64(tiers.len() as u64);
            for t in tiers {
                h.write_u64(t.from_ordinal as u64);
                h.write_u64(t.entries.len() as u64);
                for e in &t.entries {
                    let code = match *e {
                        MenuEntry::Fold => 0,
                        MenuEntry::Call => 1,
                        MenuEntry::Pot(x) => 2 + ((x as u64) << 8),
                        MenuEntry::AllIn => 3,
                    };
                    h.write_u64(code);
                }
            }
        }
        h.finish()
    }
}

/// A concrete action with the menu entry it realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AbstractAction {
    pub action: Action,
    pub label: MenuEntry,
}

/// Raise-to amount for a pot fraction: call level plus `x` times the pot after calling.
pub fn pot_raise_to(s: &Betting, thousandths: u32, call_cost: Chips) -> Chips {
    let after_call = (s.pot() + call_cost) as u64;
    let to = s.call_level() as u64 + after_call * thousandths as u64 / 1000;
    to.min(Chips::MAX as u64) as Chips
}

/// The abstract actions available at `s`, in menu order with duplicates merged.
pub fn abstract_actions(s: &GameState, menu: &ActionMenuConfig) -> Result<Vec<AbstractAction>, Error> {
    betting_actions(s.betting(), menu)
}

/// [`abstract_actions`] on a bare betting state.
pub fn betting_actions(s: &Betting, menu: &ActionMenuConfig) -> Result<Vec<AbstractAction>, Error> {
    let mut buf = [AbstractAction { action: Action::Call, label: MenuEntry::Call }; MAX_MENU];
    let n = betting_actions_into(s, menu, &mut buf)?;
    Ok(buf[..n].to_vec())
}

/// Longest menu [`betting_actions_into`] can emit.
pub const MAX_MENU: usize = 8;

/// Allocation-free [`betting_actions`]; returns the number of actions written.
pub fn betting_actions_into(s: &Betting, menu: &ActionMenuConfig, out: &mut [AbstractAction; MAX_MENU]) -> Result<usize, Error> {
    let legal = s.legal_actions()?;
    let ordinal = s.round_action_count() + 1;
    let mut n = 0;
    let mut push = |a: AbstractAction| {
        if n < MAX_MENU && !out[..n].iter().any(|o| o.action == a.action) {
            out[n] = a;
            n += 1;
        }
    };
    let max_total = s.wagers()[s.to_act()] + s.stack(s.to_act());
    for &e in menu.menu(s.round(), ordinal) {
        match e {
            MenuEntry::Fold if legal.fold => push(AbstractAction { action: Action::Fold, label: e }),
            MenuEntry::Call => push(AbstractAction { action: Action::Call, label: e }),
            MenuEntry::Pot(x) if legal.all_in => {
                let to = pot_raise_to(s, x, legal.call_cost);
                match legal.raise {
                    _ if to >= max_total => push(AbstractAction { action: Action::AllIn, label: MenuEntry::AllIn }),
                    Some((lo, _)) if to >= lo => push(AbstractAction { action: Action::RaiseTo(to), label: e }),
                    _ => {}
                }
            }
            MenuEntry::AllIn if legal.all_in => push(AbstractAction { action: Action::AllIn, label: e }),
            _ => {}
        }
    }
    Ok(n)
}

/// Pseudo-harmonic mapping of a pot-normalized size `x` onto neighbours
/// `a <= x <= b`; returns `(P(a), P(b))`.
pub fn translate_action(x: f64, a: f64, b: f64) -> Result<(f64, f64), Error> {
    if !(a <= x && x <= b) || a < 0.0 {
        return Err(Error::OutOfRange);
    }
    if x == a {
        return Ok((1.0, 0.0));
    }
    if x == b {
        return Ok((0.0, 1.0));
    }
    let pa = ((b - x) * (1.0 + a)) / ((b - a) * (1.0 + x));
    Ok((pa, 1.0 - pa))
}

/// Pot-normalized size of a raise to `to`: the increment over a call, divided by the pot after calling.
pub fn pot_fraction(s: &Betting, to: Chips) -> f64 {
    let legal_cost = s.call_level() - s.wagers()[s.to_act()];
    let after_call = (s.pot() + legal_cost) as f64;
    (to as f64 - s.call_level() as f64) / after_call
}

/// Maps a real action onto the abstract actions at `s`: a list of
/// `(index into abstract_actions, probability)`.
pub fn translate(s: &Betting, observed: Action, menu: &ActionMenuConfig) -> Result<Vec<(usize, f64)>, Error> {
    let legal = s.legal_actions()?;
    if !legal.contains(observed) {
        return Err(Error::IllegalAction(alloc::format!("{observed}")));
    }
    let acts = betting_actions(s, menu)?;
    if let Some(i) = acts.iter().position(|a| a.action == observed) {
        return Ok(vec![(i, 1.0)]);
    }
    let to = match observed {
        Action::RaiseTo(x) => x,
        Action::AllIn => s.wagers()[s.to_act()] + s.stack(s.to_act()),
        // fold and call are always on the menu when legal
        _ => return Err(Error::IllegalAction(alloc::format!("{observed}"))),
    };
    if to == s.wagers()[s.to_act()] + s.stack(s.to_act()) {
        if let Some(i) = acts.iter().position(|a| a.action == Action::AllIn) {
            return Ok(vec![(i, 1.0)]);
        }
    }
    let x = pot_fraction(s, to);
    let mut sizes: Vec<(f64, usize)> = acts
        .iter()
        .enumerate()
        .filter_map(|(i, a)| match a.action {
            Action::RaiseTo(t) => Some((pot_fraction(s, t), i)),
            Action::AllIn => Some((pot_fraction(s, s.wagers()[s.to_act()] + s.stack(s.to_act())), i)),
            _ => None,
        })
        .collect();
    sizes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let call = acts.iter().position(|a| a.action == Action::Call).expect("call always offered");
    match sizes.iter().position(|&(v, _)| v >= x) {
        // smaller than every abstract raise: between a call (size 0) and the smallest raise
        Some(0) => {
            let (pa, pb) = translate_action(x.max(0.0), 0.0, sizes[0].0)?;
            Ok(merge(vec![(call, pa), (sizes[0].1, pb)]))
        }
        Some(j) => {
            let (lo, hi) = (sizes[j - 1], sizes[j]);
            let (pa, pb) = translate_action(x, lo.0, hi.0)?;
            Ok(merge(vec![(lo.1, pa), (hi.1, pb)]))
        }
        None => Ok(vec![(sizes.last().ok_or(Error::OutOfRange)?.1, 1.0)]),
    }
}

fn merge(v: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    v.into_iter().filter(|&(_, p)| p > 0.0).collect()
}
