// End-to-end acceptance run. Every criterion prints one PASS or FAIL line
// to stderr, uncaptured, so the lines show up in ordinary `cargo test` output.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use holdem::files;
use holdem_core::abstraction::canonical::{canonical_board, preflop_class};
use holdem_core::abstraction::menu::betting_actions;
use holdem_core::abstraction::profile::{Abstraction, AbstractionProfile};
use holdem_core::agent::{Agent, AgentConfig, AlwaysCall, AlwaysFold, Instrumentation, RandomPlayer, DEFAULT_BUDGETS};
use holdem_core::arena::{run_match, MatchResult};
use holdem_core::blueprint::{train, TrainingConfig};
use holdem_core::br::{best_response_value, dense_policy, exploitability};
use holdem_core::cards::Card;
use holdem_core::cfr::{solve_tree, Policy, Variant, Weighting};
use holdem_core::eval::evaluate5;
use holdem_core::fixtures::{kuhn, leduc, leduc_public_states};
use holdem_core::game::{Action, DealSource, GameState, Round, RulesConfig};
use holdem_core::hash::{fnv64, Fnv64};
use holdem_core::subgame::leduc::{solve_depth_limited, spec_from_blueprint};
use holdem_core::subgame::OpponentModel;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    /// Digest of everything the run produced, for the determinism check.
    digest: u64,
}

fn line(o: &Outcome) -> String {
    format!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail)
}

fn report(text: &str) {
    let mut e = std::io::stderr();
    let _ = writeln!(e, "{text}");
}

fn policy_digest(p: &Policy) -> u64 {
    let mut h = Fnv64::new();
    for k in p.keys_sorted() {
        h.write_key(&k);
        for x in p.get(&k).unwrap() {
            h.write_u64(x.to_bits());
        }
    }
    h.finish()
}

fn records_digest(r: &MatchResult) -> u64 {
    fnv64(format!("{:?}", r.records).as_bytes())
}

fn kuhn_equilibrium() -> Outcome {
    let t = kuhn();
    let mut pass = true;
    let mut detail = Vec::new();
    let mut h = Fnv64::new();
    for (label, w) in [("vanilla", Weighting::Uniform), ("linear", Weighting::LINEAR)] {
        let (p, _) = solve_tree(&t, Variant::Vanilla, w, 100_000, 1, &[]).unwrap();
        let expl = exploitability(&t, &p).unwrap();
        // first player's payoff when the second best-responds
        let ev = -best_response_value(&t, &dense_policy(&t, &p).unwrap(), 1);
        pass &= expl < 1e-3 && (ev + 1.0 / 18.0).abs() <= 1e-3;
        detail.push(format!("{label} expl {expl:.3e} ev {ev:.6}"));
        h.write_u64(policy_digest(&p));
    }
    Outcome { name: "kuhn equilibrium", pass, detail: detail.join(", "), digest: h.finish() }
}

fn leduc_convergence() -> Outcome {
    let t = leduc();
    let (p, r) = solve_tree(&t, Variant::Vanilla, Weighting::LINEAR, 100_000, 1, &[1_000, 100_000]).unwrap();
    let (e3, e5) = (r.samples[0].exploitability, r.samples[1].exploitability);
    Outcome {
        name: "leduc convergence",
        pass: e5 < 0.05 && e5 < e3,
        detail: format!("expl 1e3 {e3:.4e}, 1e5 {e5:.4e}"),
        digest: policy_digest(&p) ^ e3.to_bits() ^ e5.to_bits().rotate_left(17),
    }
}

fn leduc_safety() -> Outcome {
    let t = leduc();
    let (bp, _) = solve_tree(&t, Variant::Vanilla, Weighting::LINEAR, 10_000, 1, &[]).unwrap();
    let base = exploitability(&t, &bp).unwrap();
    let mut states: Vec<_> = leduc_public_states().into_iter().filter(|s| s.end.is_none()).collect();
    states.shuffle(&mut StdRng::seed_from_u64(20));
    let (mut worst_expl, mut worst_margin, mut solved) = (f64::NEG_INFINITY, f64::INFINITY, 0);
    let mut h = Fnv64::new();
    for s in states {
        if solved == 20 {
            break;
        }
        let Ok(spec) = spec_from_blueprint(&bp, s, s.to_act as usize, false, 100_000, OpponentModel::default_set()) else {
            continue;
        };
        let r = solve_depth_limited(&spec, &bp, 3).unwrap();
        let mut combined = bp.clone();
        combined.overlay(&r.policy);
        worst_expl = worst_expl.max(exploitability(&t, &combined).unwrap() - base);
        worst_margin = r.margins.iter().filter(|m| !m.is_nan()).fold(worst_margin, |a, &m| a.min(m));
        h.write_u64(policy_digest(&r.policy));
        solved += 1;
    }
    Outcome {
        name: "subgame safety",
        pass: solved == 20 && worst_expl <= 1e-3 && worst_margin >= -1e-3,
        detail: format!("{solved} subgames, blueprint expl {base:.4e}, max increase {worst_expl:+.3e}, min margin {worst_margin:+.3e}"),
        digest: h.finish(),
    }
}

/// Category and kickers of five cards.
fn oracle5(cards: &[Card]) -> (u8, Vec<u8>) {
    let mut counts = [0u8; 13];
    for c in cards {
        counts[c.rank() as usize] += 1;
    }
    let mut groups: Vec<(u8, u8)> = (0..13u8).filter(|&r| counts[r as usize] > 0).map(|r| (counts[r as usize], r)).collect();
    groups.sort_by(|a, b| b.cmp(a));
    let flush = cards.iter().all(|c| c.suit() == cards[0].suit());
    let mut ranks: Vec<u8> = groups.iter().map(|g| g.1).collect();
    ranks.sort_unstable_by(|a, b| b.cmp(a));
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

fn suit_permutations() -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for a in 0..4u8 {
        for b in 0..4u8 {
            for c in 0..4u8 {
                let d = 6u8.wrapping_sub(a + b + c);
                if a != b && a != c && b != c && d < 4 && d != a && d != b && d != c {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

fn abstraction_counts() -> Outcome {
    let deck: Vec<Card> = Card::all().collect();
    let mut classes = HashSet::new();
    let mut shapes = HashSet::new();
    for i in 0..52 {
        for j in i + 1..52 {
            let (a, b) = (deck[i], deck[j]);
            classes.insert(preflop_class(a, b));
            shapes.insert((a.rank().max(b.rank()), a.rank().min(b.rank()), a.suit() == b.suit() && a.rank() != b.rank()));
        }
    }

    let perms = suit_permutations();
    let (mut flops, mut orbits) = (HashSet::new(), HashSet::new());
    for i in 0..52 {
        for j in i + 1..52 {
            for k in j + 1..52 {
                let f = [deck[i], deck[j], deck[k]];
                flops.insert(canonical_board(&f).0);
                let rep = perms
                    .iter()
                    .map(|p| {
                        let mut v: Vec<u8> = f.iter().map(|c| c.rank() * 4 + p[c.suit() as usize]).collect();
                        v.sort_unstable();
                        v
                    })
                    .min()
                    .unwrap();
                orbits.insert(rep);
            }
        }
    }

    let (mut ranks, mut oracle) = (HashSet::new(), HashSet::new());
    for a in 0..52 {
        for b in a + 1..52 {
            for c in b + 1..52 {
                for d in c + 1..52 {
                    for e in d + 1..52 {
                        let five = [deck[a], deck[b], deck[c], deck[d], deck[e]];
                        ranks.insert(evaluate5(&five).unwrap());
                        oracle.insert(oracle5(&five));
                    }
                }
            }
        }
    }
    let counts = [classes.len(), shapes.len(), flops.len(), orbits.len(), ranks.len(), oracle.len()];
    Outcome {
        name: "abstraction counts",
        pass: counts == [169, 169, 1755, 1755, 7462, 7462],
        detail: format!(
            "preflop {} (oracle {}), flops {} (oracle {}), 5-card ranks {} (oracle {})",
            counts[0], counts[1], counts[2], counts[3], counts[4], counts[5]
        ),
        digest: fnv64(format!("{counts:?}").as_bytes()),
    }
}

const TIERS: [&[&str]; 3] = [&["F", "C", "0.5P", "P", "2P", "4P", "A"], &["F", "C", "P", "2P", "4P", "A"], &["F", "C", "A"]];

/// The menu a state should show, from the rules of the game and the tier table alone.
fn expected_menu(s: &GameState) -> Vec<(Action, String)> {
    let ordinal = s.round_actions().len() + 1;
    let tier = TIERS[match ordinal {
        1 | 2 => 0,
        3..=5 => 1,
        _ => 2,
    }];
    let legal = s.legal_actions().unwrap();
    let me = s.to_act();
    let wager = s.wagers()[me];
    let max_total = wager + s.stack(me);
    let call_level = s.wagers()[0].max(s.wagers()[1]);
    let cost = call_level - wager;
    let pot = s.committed()[0] + s.committed()[1];
    let mut out: Vec<(Action, String)> = Vec::new();
    for &label in tier {
        let a = match label {
            "F" if cost > 0 => Some(Action::Fold),
            "F" => None,
            "C" => Some(Action::Call),
            "A" if legal.all_in => Some(Action::AllIn),
            "A" => None,
            _ if !legal.all_in => None,
            size => {
                let x: f64 = size.trim_end_matches('P').parse().unwrap_or(1.0);
                let to = call_level + ((pot + cost) as f64 * x) as u32;
                if to >= max_total {
                    Some(Action::AllIn)
                } else {
                    legal.raise.filter(|&(lo, _)| to >= lo).map(|_| Action::RaiseTo(to))
                }
            }
        };
        if let Some(a) = a {
            if !out.iter().any(|o| o.0 == a) {
                let shown = if a == Action::AllIn { "A" } else { label };
                out.push((a, shown.to_string()));
            }
        }
    }
    out
}

fn menu_conformance() -> Outcome {
    let menu = AbstractionProfile::desk().menu;
    let mut rng = StdRng::seed_from_u64(5);
    let (mut checked, mut mismatches) = (0, 0);
    let mut full_seen = [0u32; 3];
    let mut h = Fnv64::new();
    while checked < 1_000 {
        let mut s = GameState::new_hand(RulesConfig::default(), DealSource::Seed(rng.gen())).unwrap();
        while !s.is_terminal() && checked < 1_000 {
            let acts = betting_actions(s.betting(), &menu).unwrap();
            let got: Vec<(Action, String)> = acts.iter().map(|a| (a.action, a.label.to_string())).collect();
            let want = expected_menu(&s);
            if got != want {
                mismatches += 1;
            }
            let labels: Vec<&str> = got.iter().map(|g| g.1.as_str()).collect();
            for (i, t) in TIERS.iter().enumerate() {
                if labels == *t {
                    full_seen[i] += 1;
                }
            }
            h.write(format!("{got:?}").as_bytes());
            checked += 1;
            s = s.apply(acts[rng.gen_range(0..acts.len())].action).unwrap();
        }
    }
    Outcome {
        name: "menu conformance",
        pass: mismatches == 0 && full_seen.iter().all(|&n| n > 0),
        detail: format!("{checked} states, {mismatches} mismatches, full menus seen per tier {full_seen:?}"),
        digest: h.finish(),
    }
}

struct Desk {
    e2e: Outcome,
    schedule: Outcome,
    store_round_trip: bool,
}

fn schedule_ok(s: &Instrumentation) -> bool {
    (0..3).all(|r| s.resolved_decisions[r] == s.off_tree_decisions[r])
        && s.blueprint_decisions[3] == 0
        && s.resolves.iter().all(|e| e.iterations == DEFAULT_BUDGETS[e.round.index()] && (e.off_tree || e.round == Round::River))
}

fn desk_pipeline(dir: &Path) -> Desk {
    let profile = AbstractionProfile::desk();
    let t = Instant::now();
    let built = Abstraction::build(&profile, 0).unwrap();
    files::save_abstraction(dir, &built).unwrap();
    let abs = files::load_abstraction(dir, profile.menu.clone()).unwrap();
    let mut h = Fnv64::new();
    for m in &abs.maps {
        h.write_u64(fnv64(&files::buckets_to_bytes(m)));
    }
    let abs_secs = t.elapsed().as_secs();

    let t = Instant::now();
    let cfg = TrainingConfig { iterations: 1_000_000, seed: 0, ..TrainingConfig::default() };
    let (trained, _) = train(&cfg, &abs, None, |_| Ok(())).unwrap();
    let path = dir.join("desk.dhbp");
    files::save_store(&path, &trained).unwrap();
    let written = std::fs::read(&path).unwrap();
    drop(trained);
    let store = files::load_store(&path).unwrap();
    let store_round_trip = files::store_to_bytes(&store) == written;
    h.write_u64(fnv64(&written));
    drop(written);
    let train_secs = t.elapsed().as_secs();

    let rules = RulesConfig::default();
    let agent = |seed| Agent::new(AgentConfig { seed, ..AgentConfig::default() }, &abs, &store).unwrap();
    let mut a = agent(1);
    let vs_call = run_match(&mut a, &mut AlwaysCall, 10_000, 11, true, rules).unwrap();
    let mut a = agent(2);
    let vs_fold = run_match(&mut a, &mut AlwaysFold, 10_000, 12, true, rules).unwrap();
    let e2e_pass = vs_call.stats.mbb_per_hand >= 200.0 && vs_fold.stats.mbb_per_hand >= 500.0 && vs_call.violations == [0, 0] && vs_fold.violations == [0, 0];
    h.write_u64(records_digest(&vs_call));
    h.write_u64(records_digest(&vs_fold));
    let e2e = Outcome {
        name: "desk pipeline",
        pass: e2e_pass,
        detail: format!(
            "abstraction {abs_secs}s, {} infosets after 1e6 iterations in {train_secs}s; vs call {:.1} mbb/h (se {:.1}), vs fold {:.1} mbb/h (se {:.1})",
            store.policy.len(),
            vs_call.stats.mbb_per_hand,
            vs_call.stats.std_error,
            vs_fold.stats.mbb_per_hand,
            vs_fold.stats.std_error
        ),
        digest: h.finish(),
    };

    let (mut a, mut b) = (agent(3), agent(4));
    let selfplay = run_match(&mut a, &mut b, 1_000, 13, false, rules).unwrap();
    let mut probe = agent(5);
    let random = run_match(&mut probe, &mut RandomPlayer::new(6), 200, 14, false, rules).unwrap();
    let stats = [&a.stats, &b.stats, &probe.stats];
    let resolves: Vec<u64> = (0..4).map(|r| stats.iter().flat_map(|s| &s.resolves).filter(|e| e.round.index() == r).count() as u64).collect();
    let off: u64 = stats.iter().map(|s| s.off_tree_decisions.iter().sum::<u64>()).sum();
    let pass = stats.iter().all(|s| schedule_ok(s))
        && [&selfplay, &random].iter().all(|m| m.violations == [0, 0])
        && a.stats.off_tree_decisions == [0; 4]
        && resolves[3] > 0
        && off > 0;
    let schedule = Outcome {
        name: "schedule conformance",
        pass,
        detail: format!(
            "self-play blueprint {:?} resolved {:?}; off-tree probe blueprint {:?} resolved {:?} off-tree {:?}; resolves per round {resolves:?}",
            a.stats.blueprint_decisions, a.stats.resolved_decisions, probe.stats.blueprint_decisions, probe.stats.resolved_decisions, probe.stats.off_tree_decisions
        ),
        digest: records_digest(&selfplay) ^ records_digest(&random).rotate_left(29),
    };
    Desk { e2e, schedule, store_round_trip }
}

/// Checkpoint and store bytes survive a load and re-save unchanged.
fn small_file_round_trips(dir: &Path) -> bool {
    let profile = AbstractionProfile::tiny();
    let abs = Abstraction::build(&profile, 0).unwrap();
    let cfg = TrainingConfig { profile: "tiny".into(), iterations: 400, checkpoint_interval: 200, seed: 2, ..TrainingConfig::default() };
    let mut ok = true;
    let (store, _) = train(&cfg, &abs, None, |ck| {
        let path = dir.join("tiny.dhck");
        files::save_checkpoint(&path, ck).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = files::load_checkpoint(&path).unwrap();
        ok &= files::checkpoint_to_bytes(&back) == bytes;
        Ok(())
    })
    .unwrap();
    let path = dir.join("tiny.dhbp");
    files::save_store(&path, &store).unwrap();
    let back = files::load_store(&path).unwrap();
    ok && back == store && files::store_to_bytes(&back) == std::fs::read(&path).unwrap()
}

#[test]
fn acceptance() {
    let small: [fn() -> Outcome; 5] = [kuhn_equilibrium, leduc_convergence, leduc_safety, abstraction_counts, menu_conformance];
    let mut first = Vec::new();
    let mut same = true;
    for f in small {
        let t = Instant::now();
        let a = f();
        let b = f();
        same &= a.digest == b.digest && a.detail == b.detail;
        report(&format!("{} ({}s for two runs)", line(&a), t.elapsed().as_secs()));
        first.push(a);
    }

    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let x = desk_pipeline(d1.path());
    report(&line(&x.e2e));
    report(&line(&x.schedule));
    let y = desk_pipeline(d2.path());
    same &= x.e2e.digest == y.e2e.digest && x.schedule.digest == y.schedule.digest;
    let files_ok = x.store_round_trip && y.store_round_trip && small_file_round_trips(d1.path());
    let determinism = Outcome {
        name: "determinism",
        pass: same && files_ok,
        detail: format!("repeat runs identical: {same}; store and checkpoint round trips bit-exact: {files_ok}"),
        digest: 0,
    };
    report(&line(&determinism));

    let all: Vec<&Outcome> = first.iter().chain([&x.e2e, &x.schedule, &determinism]).collect();
    let passed = all.iter().filter(|o| o.pass).count();
    report(&format!("acceptance: {passed}/{} criteria passed", all.len()));
    for o in all.iter().filter(|o| !o.pass) {
        report(&format!("  failing: {}", o.name));
    }
}
