use holdem_core::abstraction::buckets::{BucketMap, BuildConfig};
use holdem_core::abstraction::features::HistogramPolicy;
use holdem_core::abstraction::menu::ActionMenuConfig;
use holdem_core::abstraction::profile::Abstraction;
use holdem_core::cards::{cards_mask, pair_cards, parse_cards, NUM_PAIRS};
use holdem_core::cfr::Policy;
use holdem_core::game::{Action, Betting, RulesConfig};
use holdem_core::subgame::hunl::*;
use holdem_core::subgame::{OpponentModel, Range};
use holdem_core::tree::ActionSeq;

fn small_abstraction() -> Abstraction {
    use holdem_core::game::Round;
    let river = BucketMap::build(Round::River, 8, &HistogramPolicy::default(), 5, &BuildConfig::default()).unwrap();
    let maps = [BucketMap::identity_preflop(), BucketMap::constant(Round::Flop), BucketMap::constant(Round::Turn), river];
    Abstraction::new(maps, ActionMenuConfig::default()).unwrap()
}

fn river_root() -> Betting {
    let mut b = Betting::new(RulesConfig::default()).unwrap();
    for a in [Action::RaiseTo(300), Action::Call, Action::Call, Action::Call, Action::Call, Action::Call] {
        b = b.apply(a).unwrap();
    }
    b
}

fn live_uniform(board: u64) -> Range {
    let w = (0..NUM_PAIRS)
        .map(|p| {
            let (a, b) = pair_cards(p);
            if (a.mask() | b.mask()) & board == 0 { 1.0 } else { 0.0 }
        })
        .collect();
    Range::from_weights(w).unwrap()
}

#[test]
fn river_resolve_improves_on_a_uniform_blueprint() {
    let abs = small_abstraction();
    let board = parse_cards("2c 7d 9h Ts Jc").unwrap();
    let root = river_root();
    let range = live_uniform(cards_mask(&board));
    let bp = Policy::new();
    let view = PolicyView { policy: &bp, prefix: ActionSeq::EMPTY };
    let alt = alt_values(&abs, root, &[], view, &board, 1, &range, 0).unwrap();
    let spec = HunlSpec {
        root,
        board: board.clone(),
        resolver: 1,
        own_range: range.clone(),
        opp_range: range.clone(),
        alt: Some(alt),
        budget: 10_000,
        models: vec![OpponentModel::identity()],
    };
    let sg = Subgame::new(spec, &abs, 0).unwrap();
    let t = std::time::Instant::now();
    let r = sg.solve(1).unwrap();
    eprintln!("solve {:?}, min margin {}", t.elapsed(), r.min_margin());
    let mean: f64 = r.audit.iter().map(|a| a.weight * a.margin).sum();
    assert!(mean > 0.0, "mean margin {mean}");
    assert_eq!(r.iterations, 10_000);
    let again = sg.solve(1).unwrap();
    assert_eq!(r.policy, again.policy);
}

fn synthetic_probs(n: usize) -> impl Fn(usize) -> Vec<f64> {
    move |p: usize| {
        let w: Vec<f64> = (0..n).map(|a| 1.0 + ((p * 7 + a * 13) % 5) as f64).collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect()
    }
}

fn posterior(prior: &Range, probs: &dyn Fn(usize) -> Vec<f64>, a: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..NUM_PAIRS).map(|p| prior.weights[p] * probs(p)[a]).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|x| x / t).collect()
}

fn preflop_spec() -> HunlSpec {
    HunlSpec {
        root: Betting::new(RulesConfig::default()).unwrap(),
        board: vec![],
        resolver: 1,
        own_range: Range::uniform(NUM_PAIRS),
        opp_range: Range::uniform(NUM_PAIRS),
        alt: Some(vec![0.0; NUM_PAIRS]),
        budget: 100,
        models: vec![OpponentModel::identity()],
    }
}

#[test]
fn off_tree_raise_mixes_neighbour_posteriors() {
    let abs = small_abstraction();
    let spec = preflop_spec();
    let bp = Policy::new();
    let view = PolicyView { policy: &bp, prefix: ActionSeq::EMPTY };
    let n = holdem_core::abstraction::menu::betting_actions(&spec.root, &abs.menu).unwrap().len();
    let probs = synthetic_probs(n);
    let nested = nested_resolve(&abs, &spec, spec.root, view, &probs, Action::RaiseTo(220), 3).unwrap();
    let lo = posterior(&spec.opp_range, &probs, 2);
    let hi = posterior(&spec.opp_range, &probs, 3);
    for p in 0..NUM_PAIRS {
        assert!((nested.opp_range.weights[p] - (0.75 * lo[p] + 0.25 * hi[p])).abs() < 1e-12);
    }
    assert_eq!(nested.own_range, spec.own_range);
    assert_eq!(nested.root, spec.root.apply(Action::RaiseTo(220)).unwrap());
    // the conservative alt value dominates each sibling's
    let alt = nested.alt.unwrap();
    for t in [2usize, 3] {
        let one = alt_values(&abs, spec.root, &[t], view, &[], 1, &spec.own_range, 3).unwrap();
        for p in (0..NUM_PAIRS).step_by(11) {
            assert!(alt[p] >= one[p] - 1e-12);
        }
    }
}

#[test]
fn abstract_action_gives_the_on_tree_spec() {
    let abs = small_abstraction();
    let spec = preflop_spec();
    let bp = Policy::new();
    let view = PolicyView { policy: &bp, prefix: ActionSeq::EMPTY };
    let acts = holdem_core::abstraction::menu::betting_actions(&spec.root, &abs.menu).unwrap();
    let probs = synthetic_probs(acts.len());
    let nested = nested_resolve(&abs, &spec, spec.root, view, &probs, acts[3].action, 3).unwrap();
    let child = spec.root.apply(acts[3].action).unwrap();
    let child_view = PolicyView { policy: &bp, prefix: ActionSeq::EMPTY.push(3) };
    let direct = alt_values(&abs, child, &[], child_view, &[], 1, &spec.own_range, 3).unwrap();
    let post = posterior(&spec.opp_range, &probs, 3);
    for p in 0..NUM_PAIRS {
        assert!((nested.opp_range.weights[p] - post[p]).abs() < 1e-12);
        let (a, b) = (nested.alt.as_ref().unwrap()[p], direct[p]);
        assert!((a - b).abs() < 1e-9 || (a.is_nan() && b.is_nan()), "pair {p}: {a} vs {b}");
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]
    #[test]
    fn repeated_nesting_keeps_ranges_valid(first in 201u32..1900, second in 0u32..3000) {
        let abs = small_abstraction();
        let spec = preflop_spec();
        let bp = Policy::new();
        let view = PolicyView { policy: &bp, prefix: ActionSeq::EMPTY };
        let n0 = holdem_core::abstraction::menu::betting_actions(&spec.root, &abs.menu).unwrap().len();
        let s1 = nested_resolve(&abs, &spec, spec.root, view, &synthetic_probs(n0), Action::RaiseTo(first), 1).unwrap();
        let node = s1.root;
        let legal = node.legal_actions().unwrap();
        let (lo, hi) = legal.raise.unwrap();
        let to = lo + second % (hi - lo + 1);
        let n1 = holdem_core::abstraction::menu::betting_actions(&node, &abs.menu).unwrap().len();
        let s2 = nested_resolve(&abs, &s1, node, view, &synthetic_probs(n1), Action::RaiseTo(to), 2).unwrap();
        for r in [&s2.own_range, &s2.opp_range] {
            proptest::prop_assert!((r.total() - 1.0).abs() < 1e-9);
            proptest::prop_assert!(r.weights.iter().all(|&w| w >= 0.0));
        }
        proptest::prop_assert!(Subgame::new(s2, &abs, 0).is_ok());
    }
}
