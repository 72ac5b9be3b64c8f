//! Session protocol: newline-delimited JSON messages between a client seat
//! and the agent, and the per-session state machine that drives them.
//!
//! A client sends `join` (optionally with a session id to resume), then
//! answers each `state` that carries a non-empty `legal` list with an `act`.
//! Hands follow each other until the client disconnects.

use rand::SeedableRng;
use rand::rngs::StdRng;
use serde::{Deserialize, Serialize};

use holdem_core::agent::{Observation, Player};
use holdem_core::cards::Card;
use holdem_core::game::{Action, Deal, DealSource, GameState, LegalActions, Outcome, RulesConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Legal {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Showdown {
    /// Hole cards per seat.
    pub holes: [String; 2],
    pub board: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMsg {
    HandStart {
        session: u64,
        hand_no: u64,
        seat: usize,
        stacks: [u32; 2],
        blinds: [u32; 2],
        holes: String,
    },
    State {
        board: String,
        pot: u32,
        to_act: usize,
        stacks: [u32; 2],
        wagers: [u32; 2],
        /// Every action of the hand so far, as "seat:action".
        history: Vec<String>,
        /// Empty unless the client is to act.
        legal: Vec<Legal>,
    },
    HandEnd {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        showdown: Option<Showdown>,
        net_chips: i64,
        /// Client's running total over the session.
        total_chips: i64,
        hands: u64,
    },
    Error {
        code: String,
        msg: String,
        legal: Vec<Legal>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMsg {
    Join {
        #[serde(default)]
        session: Option<u64>,
    },
    Act {
        kind: String,
        #[serde(default)]
        amount: Option<u32>,
    },
}

fn cards(cs: &[Card]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn legal_list(l: &LegalActions) -> Vec<Legal> {
    let mut v = Vec::new();
    if l.fold {
        v.push(Legal { kind: "fold".into(), min: None, max: None });
    }
    if l.call_cost == 0 {
        v.push(Legal { kind: "check".into(), min: None, max: None });
    } else {
        v.push(Legal { kind: "call".into(), min: Some(l.call_cost), max: Some(l.call_cost) });
    }
    if let Some((lo, hi)) = l.raise {
        v.push(Legal { kind: "raise".into(), min: Some(lo), max: Some(hi) });
    }
    if l.all_in {
        v.push(Legal { kind: "allin".into(), min: None, max: None });
    }
    v
}

/// Maps an `act` onto a game action; raise amounts are round totals.
pub fn client_action(kind: &str, amount: Option<u32>, legal: &LegalActions) -> Result<Action, String> {
    let a = match (kind, amount) {
        ("fold", None) => Action::Fold,
        ("check", None) if legal.call_cost == 0 => Action::Call,
        ("call", None) => Action::Call,
        ("raise" | "bet", Some(n)) => Action::RaiseTo(n),
        ("allin", None) => Action::AllIn,
        ("raise" | "bet", None) => return Err(format!("{kind} needs an amount")),
        (_, Some(_)) => return Err(format!("{kind} takes no amount")),
        _ => return Err(format!("'{kind}' is not an action here")),
    };
    if legal.contains(a) { Ok(a) } else { Err(format!("{a} is not legal")) }
}

pub fn error_msg(code: &str, msg: impl Into<String>, legal: Vec<Legal>) -> ServerMsg {
    ServerMsg::Error { code: code.into(), msg: msg.into(), legal }
}

/// One client's table against one opponent. The client's seat alternates
/// each hand; deals come from the session's own seeded stream.
pub struct Session<P: Player> {
    pub id: u64,
    pub rules: RulesConfig,
    opponent: P,
    rng: StdRng,
    hand_no: u64,
    state: Option<GameState>,
    actions: Vec<Action>,
    pub ledger: Vec<i64>,
}

impl<P: Player> Session<P> {
    pub fn new(id: u64, rules: RulesConfig, opponent: P, seed: u64) -> Session<P> {
        let mixed = seed ^ id.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        Session { id, rules, opponent, rng: StdRng::seed_from_u64(mixed), hand_no: 0, state: None, actions: Vec::new(), ledger: Vec::new() }
    }

    pub fn seat(&self) -> usize {
        (self.hand_no % 2) as usize
    }

    pub fn total(&self) -> i64 {
        self.ledger.iter().sum()
    }

    /// Deals the next hand; replies up to the client's first decision.
    pub fn start_hand(&mut self) -> Vec<ServerMsg> {
        self.hand_no += 1;
        let deal = Deal::from_rng(&mut self.rng);
        let state = GameState::new_hand(self.rules, DealSource::Explicit(deal)).expect("valid deal");
        let seat = self.seat();
        let mut out = vec![ServerMsg::HandStart {
            session: self.id,
            hand_no: self.hand_no,
            seat,
            stacks: [self.rules.starting_stack; 2],
            blinds: [self.rules.small_blind, self.rules.big_blind],
            holes: cards(&state.holes(seat)),
        }];
        self.state = Some(state);
        self.actions.clear();
        self.advance(&mut out);
        out
    }

    /// Replays the current hand's opening and state, for a resumed client.
    pub fn resume(&mut self) -> Vec<ServerMsg> {
        let Some(state) = &self.state else { return self.start_hand() };
        let seat = self.seat();
        let start = ServerMsg::HandStart {
            session: self.id,
            hand_no: self.hand_no,
            seat,
            stacks: [self.rules.starting_stack; 2],
            blinds: [self.rules.small_blind, self.rules.big_blind],
            holes: cards(&state.holes(seat)),
        };
        vec![start, self.state_msg()]
    }

    fn state_msg(&self) -> ServerMsg {
        let s = self.state.as_ref().expect("hand in progress");
        let mut history = Vec::new();
        let mut b = holdem_core::game::Betting::new(self.rules).expect("valid rules");
        for &a in &self.actions {
            history.push(format!("{}:{a}", b.to_act()));
            b = b.apply(a).expect("logged action");
        }
        let legal = if !s.is_terminal() && s.to_act() == self.seat() { legal_list(&s.legal_actions().expect("live")) } else { Vec::new() };
        ServerMsg::State { board: cards(s.board()), pot: s.pot(), to_act: s.to_act(), stacks: s.stacks(), wagers: s.wagers(), history, legal }
    }

    /// Lets the opponent act until the client must decide or the hand ends.
    fn advance(&mut self, out: &mut Vec<ServerMsg>) {
        loop {
            let s = self.state.as_ref().expect("hand in progress");
            if s.is_terminal() {
                self.finish(out, None);
                return;
            }
            let seat = s.to_act();
            if seat == self.seat() {
                out.push(self.state_msg());
                return;
            }
            let obs = Observation { hand_id: self.hand_no, seat, holes: s.holes(seat), board: s.board(), actions: &self.actions, rules: self.rules };
            match self.opponent.act(&obs).and_then(|a| s.apply(a).map(|n| (a, n))) {
                Ok((a, next)) => {
                    self.actions.push(a);
                    self.state = Some(next);
                }
                Err(e) => {
                    log::warn!("session {}: opponent failed to act ({e}); scored as a fold", self.id);
                    self.finish(out, Some(seat));
                    return;
                }
            }
        }
    }

    fn finish(&mut self, out: &mut Vec<ServerMsg>, forfeit: Option<usize>) {
        let s = self.state.take().expect("hand in progress");
        let me = self.seat();
        let (net, showdown) = match forfeit {
            Some(f) => {
                let lost = s.committed()[f] as i64;
                (if f == me { -lost } else { lost }, None)
            }
            None => {
                let net = s.terminal_utility().expect("terminal")[me];
                let shown = (s.outcome() == Some(Outcome::Showdown))
                    .then(|| Showdown { holes: [cards(&s.holes(0)), cards(&s.holes(1))], board: cards(&s.deal().board) });
                (net, shown)
            }
        };
        self.ledger.push(net);
        out.push(ServerMsg::HandEnd { showdown, net_chips: net, total_chips: self.total(), hands: self.ledger.len() as u64 });
        out.extend(self.start_hand());
    }

    /// Applies a client message; errors leave the session unchanged.
    pub fn handle(&mut self, msg: ClientMsg) -> Vec<ServerMsg> {
        match msg {
            ClientMsg::Join { .. } => self.resume(),
            ClientMsg::Act { kind, amount } => {
                let Some(s) = &self.state else { return vec![error_msg("no_hand", "no hand in progress", Vec::new())] };
                let legal = s.legal_actions().expect("client to act");
                match client_action(&kind, amount, &legal) {
                    Ok(a) => {
                        self.state = Some(s.apply(a).expect("checked legal"));
                        self.actions.push(a);
                        let mut out = Vec::new();
                        self.advance(&mut out);
                        out
                    }
                    Err(why) => vec![error_msg("illegal_action", why, legal_list(&legal))],
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use holdem_core::agent::AlwaysCall;

    #[test]
    fn messages_have_the_documented_shape() {
        let m = ServerMsg::HandStart { session: 1, hand_no: 1, seat: 0, stacks: [20000, 20000], blinds: [50, 100], holes: "As Kd".into() };
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["type"], "hand_start");
        assert_eq!(v["holes"], "As Kd");
        let a: ClientMsg = serde_json::from_str(r#"{"type":"act","kind":"raise","amount":300}"#).unwrap();
        assert_eq!(a, ClientMsg::Act { kind: "raise".into(), amount: Some(300) });
        let f: ClientMsg = serde_json::from_str(r#"{"type":"act","kind":"fold"}"#).unwrap();
        assert_eq!(f, ClientMsg::Act { kind: "fold".into(), amount: None });
    }

    #[test]
    fn illegal_raise_lists_legal_actions() {
        let mut s = Session::new(3, RulesConfig::default(), AlwaysCall, 0);
        let opening = s.start_hand();
        assert!(matches!(opening[0], ServerMsg::HandStart { seat: 1, .. }));
        let out = s.handle(ClientMsg::Act { kind: "raise".into(), amount: Some(150) });
        let ServerMsg::Error { code, legal, .. } = &out[0] else { panic!("{out:?}") };
        assert_eq!(code, "illegal_action");
        assert!(legal.iter().any(|l| l.kind == "raise" && l.min == Some(200)));
        // still the client's turn
        assert!(s.handle(ClientMsg::Act { kind: "check".into(), amount: None }).iter().all(|m| !matches!(m, ServerMsg::Error { .. })));
    }

    #[test]
    fn ledger_is_zero_sum_with_the_opponent() {
        let mut s = Session::new(1, RulesConfig::default(), AlwaysCall, 7);
        let mut msgs = s.start_hand();
        let mut ends = 0;
        while ends < 20 {
            let last = msgs.last().unwrap().clone();
            for m in &msgs {
                if let ServerMsg::HandEnd { net_chips, .. } = m {
                    assert!(net_chips.abs() <= 20_000);
                    ends += 1;
                }
            }
            let ServerMsg::State { legal, .. } = last else { panic!("{last:?}") };
            let kind = if legal.iter().any(|l| l.kind == "allin") && ends % 3 == 0 { "allin" } else { &legal.iter().find(|l| l.kind != "fold").unwrap().kind };
            msgs = s.handle(ClientMsg::Act { kind: kind.into(), amount: None });
        }
        assert!(s.ledger.len() >= 20);
    }
}
