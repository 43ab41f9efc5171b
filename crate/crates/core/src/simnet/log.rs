use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::hash::{hash_bytes, Hash};
use crate::simnet::message::MsgKind;
use crate::simnet::scenario::RelayStrategy;

/// One simulator event. Serialized as one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum LogRecord {
    Start {
        t: f64,
        node_count: u32,
        horizon: f64,
        strategy: RelayStrategy,
        seed: u64,
    },
    TxArrival {
        t: f64,
        node: u32,
        txid: Hash,
    },
    /// A transmission; the receiver handles it at `deliver_at`.
    Send {
        t: f64,
        deliver_at: f64,
        src: u32,
        dst: u32,
        msg: MsgKind,
        size: u64,
        id: Hash,
    },
    AdvertIssued {
        t: f64,
        node: u32,
        prev: Hash,
        id: Hash,
        txs: u32,
    },
    MiningStarted {
        t: f64,
        node: u32,
        parent: Hash,
        height: u64,
    },
    /// The node stopped hashing (mining cutoff reached).
    MiningStopped {
        t: f64,
        node: u32,
    },
    BlockFound {
        t: f64,
        node: u32,
        block: Hash,
        parent: Hash,
        height: u64,
        txs: u32,
        size: u64,
    },
    BlockAccepted {
        t: f64,
        node: u32,
        block: Hash,
        height: u64,
    },
    BlockRejected {
        t: f64,
        node: u32,
        block: Hash,
        reason: String,
    },
    TipChanged {
        t: f64,
        node: u32,
        tip: Hash,
        height: u64,
    },
    Horizon {
        t: f64,
    },
}

impl LogRecord {
    pub fn time(&self) -> f64 {
        match self {
            LogRecord::Start { t, .. }
            | LogRecord::TxArrival { t, .. }
            | LogRecord::Send { t, .. }
            | LogRecord::AdvertIssued { t, .. }
            | LogRecord::MiningStarted { t, .. }
            | LogRecord::MiningStopped { t, .. }
            | LogRecord::BlockFound { t, .. }
            | LogRecord::BlockAccepted { t, .. }
            | LogRecord::BlockRejected { t, .. }
            | LogRecord::TipChanged { t, .. }
            | LogRecord::Horizon { t } => *t,
        }
    }
}

/// Append-only record of one run, in processing order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
}

impl EventLog {
    pub fn push(&mut self, record: LogRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LogRecord> {
        self.records.iter()
    }

    /// Node count, horizon, strategy and seed from the leading `start` record.
    pub fn start(&self) -> Option<(u32, f64, RelayStrategy, u64)> {
        match self.records.first()? {
            LogRecord::Start { node_count, horizon, strategy, seed, .. } => {
                Some((*node_count, *horizon, *strategy, *seed))
            }
            _ => None,
        }
    }

    pub fn horizon(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| match r {
            LogRecord::Horizon { t } => Some(*t),
            _ => None,
        })
    }

    pub fn write_ndjson<W: Write>(&self, mut out: W) -> io::Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn to_ndjson(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to memory");
        buf
    }

    pub fn read_ndjson<R: BufRead>(input: R) -> io::Result<EventLog> {
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
            records.push(record);
        }
        Ok(EventLog { records })
    }

    /// Digest of the NDJSON form; equal digests mean byte-identical logs.
    pub fn digest(&self) -> Hash {
        hash_bytes(&self.to_ndjson())
    }
}
