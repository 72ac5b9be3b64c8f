//! TCP transport for the session protocol, one thread per connection.

use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use holdem_core::agent::Player;
use holdem_core::game::RulesConfig;

use crate::protocol::{error_msg, ClientMsg, ServerMsg, Session};

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub rules: RulesConfig,
    pub seed: u64,
    /// Idle connections are dropped after this long; their session stays resumable.
    pub read_timeout: Option<Duration>,
    /// Stop accepting after this many connections.
    pub max_connections: Option<usize>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig { rules: RulesConfig::default(), seed: 0, read_timeout: Some(Duration::from_secs(600)), max_connections: None }
    }
}

struct Shared<P: Player> {
    next_id: AtomicU64,
    parked: Mutex<HashMap<u64, Session<P>>>,
}

fn send(w: &mut impl Write, msgs: &[ServerMsg]) -> io::Result<()> {
    for m in msgs {
        serde_json::to_writer(&mut *w, m)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn connection<P, F>(stream: TcpStream, cfg: &ServeConfig, shared: &Shared<P>, factory: &F) -> io::Result<()>
where
    P: Player,
    F: Fn(u64) -> P,
{
    stream.set_read_timeout(cfg.read_timeout)?;
    let mut w = stream.try_clone()?;
    let reader = BufReader::new(stream);
    let mut session: Option<Session<P>> = None;
    let mut result = Ok(());
    for line in reader.lines() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                result = Err(e);
                break;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let reply = match (serde_json::from_str::<ClientMsg>(&line), &mut session) {
            (Err(e), _) => vec![error_msg("malformed", e.to_string(), Vec::new())],
            (Ok(ClientMsg::Join { .. }), Some(_)) => vec![error_msg("already_joined", "this connection already has a session", Vec::new())],
            (Ok(ClientMsg::Join { session: Some(id) }), None) => match shared.parked.lock().unwrap().remove(&id) {
                Some(mut s) => {
                    let r = s.resume();
                    session = Some(s);
                    r
                }
                None => vec![error_msg("unknown_session", format!("no parked session {id}"), Vec::new())],
            },
            (Ok(ClientMsg::Join { session: None }), None) => {
                let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
                let mut s = Session::new(id, cfg.rules, factory(id), cfg.seed);
                let r = s.start_hand();
                log::info!("session {id} opened");
                session = Some(s);
                r
            }
            (Ok(msg @ ClientMsg::Act { .. }), Some(s)) => s.handle(msg),
            (Ok(ClientMsg::Act { .. }), None) => vec![error_msg("no_session", "send join first", Vec::new())],
        };
        if let Err(e) = send(&mut w, &reply) {
            result = Err(e);
            break;
        }
    }
    if let Some(s) = session {
        log::info!("session {} parked after {} hands", s.id, s.ledger.len());
        shared.parked.lock().unwrap().insert(s.id, s);
    }
    result
}

/// Accepts connections until `max_connections` is reached, if set.
pub fn serve<P, F>(listener: TcpListener, cfg: &ServeConfig, factory: F) -> io::Result<()>
where
    P: Player + Send,
    F: Fn(u64) -> P + Sync,
{
    let shared = Shared { next_id: AtomicU64::new(1), parked: Mutex::new(HashMap::new()) };
    let limit = cfg.max_connections.unwrap_or(usize::MAX);
    std::thread::scope(|scope| {
        for stream in listener.incoming().take(limit) {
            let stream = stream?;
            let (shared, factory) = (&shared, &factory);
            scope.spawn(move || {
                if let Err(e) = connection(stream, cfg, shared, factory) {
                    log::warn!("connection closed: {e}");
                }
            });
        }
        Ok(())
    })
}
