use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};

use serde_json::{json, Value};

use holdem::server::{serve, ServeConfig};
use holdem_core::abstraction::profile::{Abstraction, AbstractionProfile};
use holdem_core::agent::{Agent, AgentConfig, AlwaysCall};
use holdem_core::blueprint::{train, TrainingConfig};

struct Client {
    w: TcpStream,
    r: BufReader<TcpStream>,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> Client {
        let w = TcpStream::connect(addr).unwrap();
        let r = BufReader::new(w.try_clone().unwrap());
        Client { w, r }
    }

    fn send(&mut self, v: Value) {
        self.send_raw(&v.to_string());
    }

    fn send_raw(&mut self, s: &str) {
        self.w.write_all(s.as_bytes()).unwrap();
        self.w.write_all(b"\n").unwrap();
    }

    fn recv(&mut self) -> Value {
        let mut line = String::new();
        self.r.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line:?}"))
    }

    /// Reads until a message of the given type.
    fn until(&mut self, ty: &str) -> Vec<Value> {
        let mut seen = Vec::new();
        loop {
            let m = self.recv();
            let done = m["type"] == ty;
            seen.push(m);
            if done {
                return seen;
            }
        }
    }

    /// Plays out the current decision by checking or calling.
    fn passive(&mut self, state: &Value) {
        let legal = state["legal"].as_array().unwrap();
        let kind = if legal.iter().any(|l| l["kind"] == "check") { "check" } else { "call" };
        self.send(json!({"type": "act", "kind": kind}));
    }
}

fn listener() -> (TcpListener, std::net::SocketAddr) {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let a = l.local_addr().unwrap();
    (l, a)
}

#[test]
fn scripted_client_session() {
    let (l, addr) = listener();
    let cfg = ServeConfig { max_connections: Some(2), ..ServeConfig::default() };
    let server = std::thread::spawn(move || serve(l, &cfg, |_| AlwaysCall).unwrap());

    let mut c = Client::connect(addr);
    c.send(json!({"type": "act", "kind": "call"}));
    assert_eq!(c.recv()["code"], "no_session");
    c.send(json!({"type": "join"}));
    let start = c.recv();
    assert_eq!(start["type"], "hand_start");
    assert_eq!(start["blinds"], json!([50, 100]));
    assert_eq!(start["stacks"], json!([20000, 20000]));
    assert_eq!(start["holes"].as_str().unwrap().split(' ').count(), 2);
    let session = start["session"].as_u64().unwrap();
    let hand_no = start["hand_no"].clone();
    let state = c.until("state").pop().unwrap();
    assert!(!state["legal"].as_array().unwrap().is_empty());

    c.send_raw("{not json");
    assert_eq!(c.recv()["code"], "malformed");
    c.send(json!({"type": "act", "kind": "raise", "amount": 1}));
    let err = c.recv();
    assert_eq!(err["type"], "error");
    assert_eq!(err["code"], "illegal_action");
    assert!(err["legal"].as_array().unwrap().iter().any(|l| l["kind"] == "raise" && l["min"].is_u64()));

    // reconnect and pick up the same hand
    drop(c);
    let mut c = Client::connect(addr);
    c.send(json!({"type": "join", "session": session}));
    let again = c.recv();
    assert_eq!(again["session"], session);
    assert_eq!(again["hand_no"], hand_no);
    let mut state = c.until("state").pop().unwrap();
    let mut nets = Vec::new();
    while nets.len() < 5 {
        c.passive(&state);
        for m in c.until("state") {
            if m["type"] == "hand_end" {
                nets.push(m["net_chips"].as_i64().unwrap());
                assert_eq!(m["hands"].as_u64().unwrap() as usize, nets.len());
                assert_eq!(m["total_chips"].as_i64().unwrap(), nets.iter().sum::<i64>());
            }
            state = m;
        }
    }
    drop(c);
    server.join().unwrap();
}

#[test]
fn concurrent_sessions_are_independent() {
    let (l, addr) = listener();
    let cfg = ServeConfig { max_connections: Some(2), seed: 11, ..ServeConfig::default() };
    let server = std::thread::spawn(move || serve(l, &cfg, |_| AlwaysCall).unwrap());
    let mut a = Client::connect(addr);
    let mut b = Client::connect(addr);
    a.send(json!({"type": "join"}));
    b.send(json!({"type": "join"}));
    let sa = a.recv();
    let sb = b.recv();
    assert_ne!(sa["session"], sb["session"]);
    // b plays three hands while a sits
    let mut state = b.until("state").pop().unwrap();
    let mut ended = 0;
    while ended < 3 {
        b.passive(&state);
        for m in b.until("state") {
            ended += (m["type"] == "hand_end") as usize;
            state = m;
        }
    }
    let state_a = a.until("state").pop().unwrap();
    a.passive(&state_a);
    let next = a.recv();
    assert!(next["type"] == "state" || next["type"] == "hand_end");
    if next["type"] == "hand_end" {
        assert_eq!(next["hands"], 1);
    }
    drop((a, b));
    server.join().unwrap();
}

#[test]
fn agent_serves_legal_actions() {
    let abs = Abstraction::build(&AbstractionProfile::tiny(), 0).unwrap();
    let store = train(&TrainingConfig { profile: "tiny".into(), iterations: 500, ..TrainingConfig::default() }, &abs, None, |_| Ok(())).unwrap().0;
    let (l, addr) = listener();
    let cfg = ServeConfig { max_connections: Some(1), ..ServeConfig::default() };
    std::thread::scope(|s| {
        s.spawn(|| {
            serve(l, &cfg, |id| Agent::new(AgentConfig { budgets: [200; 4], seed: id, ..AgentConfig::default() }, &abs, &store).unwrap()).unwrap()
        });
        let mut c = Client::connect(addr);
        c.send(json!({"type": "join"}));
        let mut state = c.until("state").pop().unwrap();
        let mut ended = 0;
        while ended < 6 {
            c.passive(&state);
            for m in c.until("state") {
                assert_ne!(m["type"], "error");
                ended += (m["type"] == "hand_end") as usize;
                state = m;
            }
        }
    });
}
