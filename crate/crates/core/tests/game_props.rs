use proptest::prelude::*;

use holdem_core::abstraction::canonical::{canonicalize, permute_card, preflop_class, NUM_PREFLOP_CLASSES, SUIT_PERMS};
use holdem_core::abstraction::menu::{betting_actions, translate, ActionMenuConfig};
use holdem_core::cards::{Card, NUM_PAIRS};
use holdem_core::eval::evaluate7;
use holdem_core::game::{Action, Betting, DealSource, GameState, RulesConfig};

/// Category and kickers of exactly five cards, compared lexicographically.
fn oracle5(cards: &[Card]) -> (u8, Vec<u8>) {
    let mut counts = [0u8; 13];
    for c in cards {
        counts[c.rank() as usize] += 1;
    }
    // ranks ordered by (count, rank) descending
    let mut groups: Vec<(u8, u8)> = (0..13u8).filter(|&r| counts[r as usize] > 0).map(|r| (counts[r as usize], r)).collect();
    groups.sort_by(|a, b| b.cmp(a));
    let flush = cards.iter().all(|c| c.suit() == cards[0].suit());
    let mut ranks: Vec<u8> = cards.iter().map(|c| c.rank()).collect();
    ranks.sort_unstable_by(|a, b| b.cmp(a));
    ranks.dedup();
    let straight = if ranks.len() == 5 && ranks[0] - ranks[4] == 4 {
        Some(ranks[0])
    } else if ranks == [12, 3, 2, 1, 0] {
        Some(3)
    } else {
        None
    };
    let kick: Vec<u8> = groups.iter().map(|g| g.1).collect();
    let shape: Vec<u8> = groups.iter().map(|g| g.0).collect();
    match (straight, flush, shape.as_slice()) {
        (Some(h), true, _) => (8, vec![h]),
        (_, _, [4, 1]) => (7, kick),
        (_, _, [3, 2]) => (6, kick),
        (_, true, _) => (5, kick),
        (Some(h), false, _) => (4, vec![h]),
        (_, _, [3, 1, 1]) => (3, kick),
        (_, _, [2, 2, 1]) => (2, kick),
        (_, _, [2, 1, 1, 1]) => (1, kick),
        _ => (0, kick),
    }
}

fn oracle7(cards: &[Card]) -> (u8, Vec<u8>) {
    let mut best = (0, Vec::new());
    for skip1 in 0..7 {
        for skip2 in skip1 + 1..7 {
            let five: Vec<Card> = (0..7).filter(|&i| i != skip1 && i != skip2).map(|i| cards[i]).collect();
            best = best.max(oracle5(&five));
        }
    }
    best
}

fn distinct_cards(n: usize) -> impl Strategy<Value = Vec<Card>> {
    Just((0..52u8).collect::<Vec<_>>()).prop_shuffle().prop_map(move |v| v[..n].iter().map(|&i| Card::from_index(i).unwrap()).collect())
}

/// Actions drawn from the legal set by index choices.
fn play_out(rules: RulesConfig, picks: &[(u8, u32)]) -> (GameState, Vec<GameState>) {
    let mut s = GameState::new_hand(rules, DealSource::Seed(picks.len() as u64)).unwrap();
    let mut trail = vec![s.clone()];
    for &(kind, frac) in picks {
        if s.is_terminal() {
            break;
        }
        let l = s.legal_actions().unwrap();
        let mut options = vec![Action::Call];
        if l.fold {
            options.push(Action::Fold);
        }
        if let Some((lo, hi)) = l.raise {
            options.push(Action::RaiseTo(lo + ((hi - lo) as u64 * frac as u64 / 1000) as u32));
        }
        if l.all_in {
            options.push(Action::AllIn);
        }
        s = s.apply(options[kind as usize % options.len()]).unwrap();
        trail.push(s.clone());
    }
    (s, trail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn evaluator_orders_like_brute_force(a in distinct_cards(9)) {
        let board = &a[4..9];
        let h0: Vec<Card> = a[0..2].iter().chain(board).copied().collect();
        let h1: Vec<Card> = a[2..4].iter().chain(board).copied().collect();
        let e = evaluate7(&h0).unwrap().cmp(&evaluate7(&h1).unwrap());
        let o = oracle7(&h0).cmp(&oracle7(&h1));
        prop_assert_eq!(e, o);
        prop_assert_eq!(evaluate7(&h0).unwrap().category() as u8, oracle7(&h0).0);
    }

    #[test]
    fn chips_are_conserved(picks in prop::collection::vec((0u8..4, 0u32..=1000), 0..40), short in prop::bool::ANY) {
        let rules = RulesConfig { starting_stack: if short { 1_000 } else { 20_000 }, ..RulesConfig::default() };
        let (end, trail) = play_out(rules, &picks);
        for s in &trail {
            let total: u32 = s.committed().iter().sum::<u32>() + s.stacks().iter().sum::<u32>();
            prop_assert_eq!(total, 2 * rules.starting_stack);
            prop_assert_eq!(s.pot(), s.committed()[0] + s.committed()[1]);
        }
        if end.is_terminal() {
            let u = end.terminal_utility().unwrap();
            prop_assert_eq!(u[0] + u[1], 0);
            prop_assert!(u[0].unsigned_abs() <= rules.starting_stack as u64);
        }
    }

    #[test]
    fn menu_actions_are_legal(picks in prop::collection::vec((0u8..4, 0u32..=1000), 0..30)) {
        let menu = ActionMenuConfig::default();
        let (_, trail) = play_out(RulesConfig::default(), &picks);
        for s in trail.iter().filter(|s| !s.is_terminal()) {
            let b: &Betting = s.betting();
            let acts = betting_actions(b, &menu).unwrap();
            prop_assert!(!acts.is_empty());
            let l = b.legal_actions().unwrap();
            for a in &acts {
                prop_assert!(l.contains(a.action), "{} not legal", a.action);
                if let Action::RaiseTo(x) = a.action {
                    let (lo, hi) = l.raise.unwrap();
                    prop_assert!(lo <= x && x <= hi);
                }
            }
            let mut distinct = acts.iter().map(|a| a.action).collect::<Vec<_>>();
            distinct.dedup();
            prop_assert_eq!(distinct.len(), acts.len());
            if let Some((lo, hi)) = l.raise {
                for x in [lo, (lo + hi) / 2, hi] {
                    let t = translate(b, Action::RaiseTo(x), &menu).unwrap();
                    let sum: f64 = t.iter().map(|p| p.1).sum();
                    prop_assert!((sum - 1.0).abs() < 1e-12);
                    prop_assert!(t.iter().all(|p| p.0 < acts.len() && p.1 >= 0.0));
                }
            }
        }
    }

    #[test]
    fn canonical_index_ignores_suit_names(cards in distinct_cards(7), n in prop::sample::select(vec![0usize, 3, 4, 5]), p in 0usize..24) {
        let holes = [cards[0], cards[1]];
        let board = &cards[2..2 + n];
        let perm = &SUIT_PERMS[p];
        let holes2 = [permute_card(holes[1], perm), permute_card(holes[0], perm)];
        let board2: Vec<Card> = board.iter().rev().map(|&c| permute_card(c, perm)).collect();
        prop_assert_eq!(canonicalize(holes, board).unwrap(), canonicalize(holes2, &board2).unwrap());
    }
}

#[test]
fn preflop_classes_match_enumeration() {
    // oracle: pairs 13 x 6 combos, suited 78 x 4, offsuit 78 x 12
    let mut sizes = vec![0usize; NUM_PREFLOP_CLASSES];
    let deck: Vec<Card> = Card::all().collect();
    for i in 0..52 {
        for j in i + 1..52 {
            sizes[preflop_class(deck[i], deck[j])] += 1;
        }
    }
    assert_eq!(sizes.iter().sum::<usize>(), NUM_PAIRS);
    assert!(sizes.iter().all(|&s| s > 0));
    let mut hist = sizes.clone();
    hist.sort_unstable();
    hist.dedup();
    assert_eq!(hist, vec![4, 6, 12]);
    assert_eq!(sizes.iter().filter(|&&s| s == 6).count(), 13);
    assert_eq!(sizes.iter().filter(|&&s| s == 4).count(), 78);
    assert_eq!(sizes.iter().filter(|&&s| s == 12).count(), 78);
}
