use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BattleRecord, ModelRef, Source};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Timestamp {
    Seconds(i64),
    Text(String),
}

impl Timestamp {
    /// Seconds since the Unix epoch. Text must be RFC 3339, or an ISO date-time
    /// without offset (read as UTC).
    pub fn epoch_seconds(&self) -> Option<i64> {
        match self {
            Timestamp::Seconds(s) => Some(*s),
            Timestamp::Text(t) => DateTime::parse_from_rfc3339(t)
                .map(|d| d.timestamp())
                .or_else(|_| NaiveDateTime::parse_from_str(t, "%Y-%m-%dT%H:%M:%S%.f").map(|d| d.and_utc().timestamp()))
                .ok(),
        }
    }
}

/// One line of a JSONL battle log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleLogLine {
    pub schema_version: u64,
    pub timestamp: Timestamp,
    pub model_a: String,
    pub model_b: String,
    pub winner: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battle_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ingested {
    pub records: Vec<BattleRecord>,
    pub rejections: Vec<Rejection>,
}

struct Parsed {
    line: usize,
    timestamp: i64,
    model_a: String,
    model_b: String,
    winner: String,
    group: Option<String>,
}

fn parse_line(line_no: usize, text: &str) -> Result<std::result::Result<Parsed, String>> {
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return Ok(Err(format!("malformed JSON: {e}"))),
    };
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(SCHEMA_VERSION) => {}
        Some(version) => return Err(Error::SchemaVersionUnsupported { line: line_no, version }),
        None => return Ok(Err("missing or non-integer schema_version".into())),
    }
    let line: BattleLogLine = match serde_json::from_value(value) {
        Ok(l) => l,
        Err(e) => return Ok(Err(format!("malformed record: {e}"))),
    };
    if line.model_a.is_empty() || line.model_b.is_empty() {
        return Ok(Err("empty model id".into()));
    }
    if line.model_a == line.model_b {
        return Ok(Err(format!("self battle of `{}`", line.model_a)));
    }
    if line.winner != line.model_a && line.winner != line.model_b {
        return Ok(Err(format!("winner `{}` is neither model", line.winner)));
    }
    let Some(timestamp) = line.timestamp.epoch_seconds() else {
        return Ok(Err(format!("unreadable timestamp {:?}", line.timestamp)));
    };
    Ok(Ok(Parsed {
        line: line_no,
        timestamp,
        model_a: line.model_a,
        model_b: line.model_b,
        winner: line.winner,
        group: line.battle_group,
    }))
}

fn record(winner: &str, loser: &str, a_is_winner: bool, timestamp: i64) -> BattleRecord {
    let (a, b) = if a_is_winner { (winner, loser) } else { (loser, winner) };
    BattleRecord::new(ModelRef::new(a), ModelRef::new(b), a_is_winner)
        .with_timestamp(timestamp)
        .with_source(Source::Live)
}

/// Reads a JSONL battle log.
///
/// Bad lines are rejected with their line number and parsing continues; an
/// unsupported `schema_version` aborts. Lines sharing a `battle_group` form
/// one multi-model round: they must agree on the winner, and the round
/// expands to the winner against each other participant, emitted where the
/// group's first line stood.
pub fn ingest_reader(reader: impl BufRead) -> Result<Ingested> {
    let mut out = Ingested::default();
    let mut parsed = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(k + 1, &line)? {
            Ok(p) => parsed.push(p),
            Err(reason) => out.rejections.push(Rejection { line: k + 1, reason }),
        }
    }

    let mut groups: HashMap<String, Vec<usize>> = HashMap::new();
    for (k, p) in parsed.iter().enumerate() {
        if let Some(g) = &p.group {
            groups.entry(g.clone()).or_default().push(k);
        }
    }

    for p in &parsed {
        let Some(g) = &p.group else {
            out.records.push(record(&p.winner, loser_of(p), p.winner == p.model_a, p.timestamp));
            continue;
        };
        let members = &groups[g];
        if parsed[members[0]].line != p.line {
            continue;
        }
        let winner = &p.winner;
        if members.iter().any(|&k| &parsed[k].winner != winner) {
            for &k in members {
                out.rejections.push(Rejection {
                    line: parsed[k].line,
                    reason: format!("battle group `{g}` has inconsistent winners"),
                });
            }
            continue;
        }
        let mut losers: Vec<&str> = Vec::new();
        for &k in members {
            let l = loser_of(&parsed[k]);
            if !losers.contains(&l) {
                losers.push(l);
            }
        }
        for l in losers {
            out.records.push(record(winner, l, true, p.timestamp));
        }
    }
    out.rejections.sort_by_key(|r| r.line);
    Ok(out)
}

fn loser_of(p: &Parsed) -> &str {
    if p.winner == p.model_a {
        &p.model_b
    } else {
        &p.model_a
    }
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Ingested> {
    ingest_reader(BufReader::new(File::open(path)?))
}

/// Writes records as schema-1 JSONL, one line per valid record.
pub fn write_battle_log(records: &[BattleRecord], mut w: impl Write) -> Result<()> {
    for r in records.iter().filter(|r| r.valid) {
        let line = BattleLogLine {
            schema_version: SCHEMA_VERSION,
            timestamp: Timestamp::Seconds(r.timestamp),
            model_a: r.model_a.id.clone(),
            model_b: r.model_b.id.clone(),
            winner: r.winner().id.clone(),
            battle_group: None,
            app_id: None,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
