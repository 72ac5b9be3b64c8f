//! Text outputs: solve reports (CSV), re-solve audits (TSV) and match logs
//! (one JSON hand per line).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use holdem_core::arena::{match_stats, HandRecord, MatchStats};
use holdem_core::cards::pair_cards;
use holdem_core::cfr::SolveReport;
use holdem_core::subgame::AuditRow;

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct ReportRow {
    iteration: u64,
    exploitability: Option<f64>,
    elapsed_ms: u64,
}

/// One row per exploitability sample, then a final row when the report
/// carries a final value or has no samples at all.
pub fn write_report_csv<W: Write>(out: W, report: &SolveReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &report.samples {
        w.serialize(ReportRow { iteration: s.iteration, exploitability: Some(s.exploitability), elapsed_ms: s.elapsed_ms })?;
    }
    let last = report.samples.last().map(|s| s.iteration);
    if last != Some(report.iterations) {
        w.serialize(ReportRow { iteration: report.iterations, exploitability: report.final_exploitability, elapsed_ms: report.elapsed_ms })?;
    }
    w.flush()?;
    Ok(())
}

/// Rows as (iteration, exploitability, elapsed-ms).
pub fn read_report_csv<R: std::io::Read>(input: R) -> Result<Vec<(u64, Option<f64>, u64)>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<ReportRow>().map(|row| row.map(|x| (x.iteration, x.exploitability, x.elapsed_ms)).map_err(Error::from)).collect()
}

pub fn write_audit_tsv<W: Write>(mut out: W, rows: &[AuditRow]) -> Result<()> {
    writeln!(out, "hand\tweight\talt\tachieved\tmargin")?;
    for r in rows {
        let (a, b) = pair_cards(r.hand);
        writeln!(out, "{a}{b}\t{:.9}\t{:.6}\t{:.6}\t{:.6}", r.weight, r.alt, r.achieved, r.margin)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoggedHand {
    pub hand_id: u64,
    pub seats: [usize; 2],
    pub holes: [String; 2],
    pub board: String,
    pub actions: Vec<String>,
    pub net: [i64; 2],
    pub violation: Option<usize>,
    pub duplicate: bool,
    pub big_blind: u32,
}

impl LoggedHand {
    pub fn new(h: &HandRecord, duplicate: bool, big_blind: u32) -> LoggedHand {
        let cards = |cs: &[holdem_core::cards::Card]| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        LoggedHand {
            hand_id: h.hand_id,
            seats: h.seats,
            holes: [cards(&h.deal.holes[0]), cards(&h.deal.holes[1])],
            board: cards(&h.deal.board),
            actions: h.actions.iter().map(|a| a.to_string()).collect(),
            net: h.net,
            violation: h.violation,
            duplicate,
            big_blind,
        }
    }

    /// Chips won by match player 0.
    pub fn first_player_net(&self) -> i64 {
        self.net[if self.seats[0] == 0 { 0 } else { 1 }]
    }
}

pub fn write_match_log<W: Write>(mut out: W, hands: &[LoggedHand]) -> Result<()> {
    for h in hands {
        serde_json::to_writer(&mut out, h)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_match_log<R: BufRead>(input: R) -> Result<Vec<LoggedHand>> {
    let mut v = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            v.push(serde_json::from_str(&line)?);
        }
    }
    Ok(v)
}

/// Stats for match player 0; duplicate logs pair consecutive hands.
pub fn log_stats(hands: &[LoggedHand]) -> Result<MatchStats> {
    let first = hands.first().ok_or_else(|| Error::Usage("empty match log".into()))?;
    let (dup, bb) = (first.duplicate, first.big_blind);
    if hands.iter().any(|h| h.duplicate != dup || h.big_blind != bb) {
        return Err(Error::Usage("match log mixes settings".into()));
    }
    let units: Vec<i64> = if dup {
        if hands.len() % 2 == 1 {
            return Err(Error::Usage("duplicate log has an unpaired hand".into()));
        }
        hands.chunks(2).map(|c| c[0].first_player_net() + c[1].first_player_net()).collect()
    } else {
        hands.iter().map(LoggedHand::first_player_net).collect()
    };
    Ok(match_stats(&units, if dup { 2 } else { 1 }, bb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use holdem_core::agent::{AlwaysCall, RandomPlayer};
    use holdem_core::arena::run_match;
    use holdem_core::cfr::ExploitSample;
    use holdem_core::game::RulesConfig;

    #[test]
    fn report_round_trip() {
        let report = SolveReport {
            iterations: 20,
            elapsed_ms: 5,
            samples: vec![ExploitSample { iteration: 10, exploitability: 0.25, elapsed_ms: 2 }],
            final_exploitability: Some(0.125),
        };
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &report).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("iteration,exploitability,elapsed_ms\n"));
        assert_eq!(read_report_csv(&buf[..]).unwrap(), vec![(10, Some(0.25), 2), (20, Some(0.125), 5)]);
    }

    #[test]
    fn log_reproduces_match_stats() {
        for dup in [false, true] {
            let r = run_match(&mut RandomPlayer::new(1), &mut AlwaysCall, 30, 4, dup, RulesConfig::default()).unwrap();
            let logged: Vec<_> = r.records.iter().map(|h| LoggedHand::new(h, dup, 100)).collect();
            let mut buf = Vec::new();
            write_match_log(&mut buf, &logged).unwrap();
            let back = read_match_log(&buf[..]).unwrap();
            assert_eq!(back, logged);
            assert_eq!(log_stats(&back).unwrap(), r.stats);
        }
    }
}
