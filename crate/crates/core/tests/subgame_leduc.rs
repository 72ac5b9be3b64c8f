use holdem_core::cfr::{solve_tree, Policy, Variant, Weighting};
use holdem_core::fixtures::{leduc, leduc_public_states, LeducEnd, LeducPublic, CALL, FOLD, RAISE};
use holdem_core::subgame::leduc::*;
use holdem_core::subgame::{OpponentModel, RangeTransform, Continuation};

fn blueprint(iters: u64) -> Policy {
    solve_tree(&leduc(), Variant::Vanilla, Weighting::LINEAR, iters, 1, &[]).unwrap().0
}

/// Round-two state after a check-check first round with the public card `pc`.
fn late_root(pc: u8) -> LeducPublic {
    LeducPublic::root().apply(CALL).apply(CALL).deal_public(pc).apply(RAISE)
}

/// Opponent value by brute force over all pure opponent strategies in the subgame.
fn brute_alt(bp: &Policy, root: &LeducPublic, resolver: usize, j: usize, own: &[f64]) -> f64 {
    let opp = 1 - resolver;
    fn states(s: LeducPublic, opp: usize, out: &mut Vec<LeducPublic>) {
        if s.end.is_some() {
            return;
        }
        if s.to_act as usize == opp {
            out.push(s);
        }
        for a in s.actions() {
            states(s.apply(a), opp, out);
        }
    }
    let mut dec = Vec::new();
    states(*root, opp, &mut dec);
    let arity: Vec<usize> = dec.iter().map(|s| s.actions().len()).collect();
    let total: usize = arity.iter().product();
    let pc = root.public_card.unwrap();
    let mut best = f64::NEG_INFINITY;
    for code in 0..total {
        let mut pick = Vec::new();
        let mut c = code;
        for &a in &arity {
            pick.push(c % a);
            c /= a;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..3u8 {
            let mut cards = [0u8; 2];
            cards[resolver] = i;
            cards[opp] = j as u8;
            let w = holdem_core::fixtures::leduc_deal_prob(cards) * holdem_core::fixtures::leduc_public_prob(cards, pc) * own[i as usize];
            if w == 0.0 {
                continue;
            }
            fn ev(s: LeducPublic, cards: [u8; 2], opp: usize, bp: &Policy, dec: &[LeducPublic], pick: &[usize]) -> f64 {
                if s.end.is_some() {
                    let u = s.payoff(cards);
                    return if opp == 0 { u } else { -u };
                }
                let acts = s.actions();
                let p = s.to_act as usize;
                if p == opp {
                    let k = dec.iter().position(|d| *d == s).unwrap();
                    return ev(s.apply(acts[pick[k]]), cards, opp, bp, dec, pick);
                }
                let probs = bp.probs(&s.key(p, cards[p]), acts.len());
                acts.iter().zip(probs.iter()).map(|(&a, &q)| if q > 0.0 { q * ev(s.apply(a), cards, opp, bp, dec, pick) } else { 0.0 }).sum()
            }
            num += w * ev(*root, cards, opp, bp, &dec, &pick);
            den += w;
        }
        best = best.max(num / den);
    }
    best
}

#[test]
fn alt_values_match_brute_force() {
    let bp = blueprint(2_000);
    for pc in 0..3 {
        let root = late_root(pc);
        let resolver = root.to_act as usize;
        let own = reach(&bp, &root, resolver).unwrap();
        let own_r = holdem_core::subgame::Range::from_weights(own.clone()).unwrap();
        let alt = blueprint_alt_values(&bp, &root, resolver, &own_r).unwrap();
        for j in 0..3 {
            let b = brute_alt(&bp, &root, resolver, j, &own);
            assert!((alt[j] - b).abs() < 1e-9, "pc {pc} j {j}: {} vs {b}", alt[j]);
        }
    }
}

#[test]
fn always_folding_blueprint_concedes_the_pot_share() {
    let root = LeducPublic::root().apply(RAISE);
    let resolver = root.to_act as usize;
    let mut bp = blueprint(500);
    for c in 0..3 {
        bp.insert(root.key(resolver, c), vec![1.0, 0.0, 0.0]);
    }
    let own = holdem_core::subgame::Range::uniform(3);
    let alt = blueprint_alt_values(&bp, &root, resolver, &own).unwrap();
    for a in alt {
        assert!((a - root.contrib[resolver] as f64).abs() < 1e-12);
    }
    assert_eq!(root.apply(FOLD).end, Some(LeducEnd::Fold { folder: resolver as u8 }));
}

#[test]
fn alt_values_ignore_the_opponent_range() {
    let bp = blueprint(2_000);
    let root = LeducPublic::root().apply(RAISE).apply(CALL).deal_public(1);
    let resolver = root.to_act as usize;
    let a = spec_from_blueprint(&bp, root, resolver, false, 10, vec![OpponentModel::identity()]).unwrap();
    // change only how the opponent got here
    let mut bp2 = bp.clone();
    let first = LeducPublic::root();
    for c in 0..3 {
        bp2.insert(first.key(0, c), vec![0.3, 0.7]);
    }
    let b = spec_from_blueprint(&bp2, root, resolver, false, 10, vec![OpponentModel::identity()]).unwrap();
    if resolver == 0 {
        return;
    }
    assert_ne!(a.opp_range, b.opp_range);
    let (x, y) = (a.alt.unwrap(), b.alt.unwrap());
    for j in 0..3 {
        assert!((x[j] - y[j]).abs() < 1e-12);
    }
}

#[test]
fn dominated_hand_terminates() {
    let bp = blueprint(2_000);
    let root = late_root(2);
    let resolver = root.to_act as usize;
    let mut spec = spec_from_blueprint(&bp, root, resolver, false, 2_000, vec![OpponentModel::identity()]).unwrap();
    spec.alt.as_mut().unwrap()[0] = 100.0;
    let g = build_gadget(&spec, &bp).unwrap();
    let (policy, _) = solve_tree(&g.tree, Variant::Vanilla, Weighting::LINEAR, 2_000, 1, &[]).unwrap();
    let want = root.key(1 - resolver, 0);
    let key = g.tree.infosets().iter().find(|i| i.key.round == 200 && i.key.bucket == want.bucket).unwrap().key;
    let p = policy.get(&key).unwrap();
    assert!(p[0] > 0.999, "terminate prob {}", p[0]);
}

#[test]
fn unsafe_mode_has_no_terminate_layer() {
    let bp = blueprint(500);
    let root = late_root(0);
    let mut spec = spec_from_blueprint(&bp, root, root.to_act as usize, false, 10, vec![OpponentModel::identity()]).unwrap();
    let safe = build_gadget(&spec, &bp).unwrap();
    spec.alt = None;
    let g = build_gadget(&spec, &bp).unwrap();
    assert!(g.tree.infosets().iter().all(|i| i.key.round != 200));
    assert!(safe.tree.infosets().iter().any(|i| i.key.round == 200));
}

#[test]
fn gadget_size_accounting() {
    let bp = blueprint(500);
    let root = LeducPublic::root().apply(CALL);
    let resolver = root.to_act as usize;
    let spec = spec_from_blueprint(&bp, root, resolver, false, 10, vec![OpponentModel::identity()]).unwrap();
    let g = build_gadget(&spec, &bp).unwrap();
    // independent count: subgame nodes per deal plus, per entering hand,
    // a terminate decision, its terminal, and the entry chance node; plus the root
    fn count(s: LeducPublic, cards: [u8; 2]) -> usize {
        match s.end {
            Some(LeducEnd::RoundOver) => {
                1 + (0..3u8).filter(|&pc| holdem_core::fixtures::leduc_public_prob(cards, pc) > 0.0).map(|pc| count(s.deal_public(pc), cards)).sum::<usize>()
            }
            Some(_) => 1,
            None => 1 + s.actions().into_iter().map(|a| count(s.apply(a), cards)).sum::<usize>(),
        }
    }
    let mut expected = 1;
    for &j in &g.hands {
        expected += 3;
        for i in 0..3u8 {
            let mut c = [0u8; 2];
            c[resolver] = i;
            c[1 - resolver] = j as u8;
            if holdem_core::fixtures::leduc_deal_prob(c) > 0.0 && spec.own_range.weights[i as usize] > 0.0 {
                expected += count(root, c);
            }
        }
    }
    assert_eq!(g.tree.num_nodes(), expected);
}

#[test]
fn single_model_is_plain_resolving() {
    let bp = blueprint(1_000);
    let root = late_root(1);
    let r = root.to_act as usize;
    let one = spec_from_blueprint(&bp, root, r, false, 500, vec![OpponentModel::identity()]).unwrap();
    let dup = spec_from_blueprint(&bp, root, r, false, 500, vec![OpponentModel::identity(), OpponentModel::new("again", RangeTransform::Identity, Continuation::Blueprint)]).unwrap();
    let a = solve_depth_limited(&one, &bp, 9).unwrap();
    let b = solve_depth_limited(&dup, &bp, 9).unwrap();
    assert_eq!(a.policy, b.policy);
}

#[test]
fn more_models_never_raise_the_resolver_value() {
    let bp = blueprint(1_000);
    for root in [LeducPublic::root().apply(RAISE), LeducPublic::root().apply(CALL).apply(RAISE)] {
        let r = root.to_act as usize;
        let single = spec_from_blueprint(&bp, root, r, true, 3_000, vec![OpponentModel::identity()]).unwrap();
        let multi = spec_from_blueprint(&bp, root, r, true, 3_000, OpponentModel::default_set()).unwrap();
        let gs = build_gadget(&single, &bp).unwrap();
        let gm = build_gadget(&multi, &bp).unwrap();
        let ps = solve_depth_limited(&single, &bp, 2).unwrap().policy;
        let pm = solve_depth_limited(&multi, &bp, 2).unwrap().policy;
        // for any fixed strategy the richer opponent does at least as well
        for p in [&ps, &pm] {
            assert!(guaranteed_value(&gm, r, p).unwrap() <= guaranteed_value(&gs, r, p).unwrap() + 1e-12);
        }
        assert!(guaranteed_value(&gm, r, &pm).unwrap() <= guaranteed_value(&gs, r, &ps).unwrap() + 1e-3);
    }
}

#[test]
fn empty_model_set_and_zero_budget_are_rejected() {
    let bp = blueprint(200);
    let root = late_root(0);
    let r = root.to_act as usize;
    let mut spec = spec_from_blueprint(&bp, root, r, false, 10, vec![OpponentModel::identity()]).unwrap();
    spec.budget = 0;
    assert!(build_gadget(&spec, &bp).is_err());
    spec.budget = 10;
    spec.models.clear();
    assert!(build_gadget(&spec, &bp).is_err());
}

#[test]
fn unreachable_root_is_rejected() {
    let mut bp = blueprint(200);
    let root = LeducPublic::root().apply(RAISE);
    for c in 0..3 {
        bp.insert(LeducPublic::root().key(0, c), vec![1.0, 0.0]);
    }
    assert!(spec_from_blueprint(&bp, root, 1, false, 10, vec![OpponentModel::identity()]).is_err());
}

#[test]
fn margins_improve_with_budget() {
    let bp = blueprint(2_000);
    let states: Vec<_> = leduc_public_states().into_iter().filter(|s| s.end.is_none() && s.round == 1).collect();
    for s in states.iter().step_by(41).take(3) {
        let r = s.to_act as usize;
        let lo = spec_from_blueprint(&bp, *s, r, false, 1_000, vec![OpponentModel::identity()]).unwrap();
        let hi = LeducSpec { budget: 100_000, ..lo.clone() };
        let min = |x: &Resolved| x.margins.iter().filter(|m| !m.is_nan()).cloned().fold(f64::INFINITY, f64::min);
        let a = solve_depth_limited(&lo, &bp, 1).unwrap();
        let b = solve_depth_limited(&hi, &bp, 1).unwrap();
        assert!(min(&b) >= min(&a) - 1e-9, "{} < {}", min(&b), min(&a));
        assert!(min(&b) >= -1e-3);
    }
}
