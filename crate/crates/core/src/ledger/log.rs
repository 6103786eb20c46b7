//! Line-delimited JSON transaction log.
//!
//! One object per line, `kind` first. Field order per kind:
//!
//! | kind           | fields                                                   |
//! |----------------|----------------------------------------------------------|
//! | `registration` | `identity`, `address`, `grant`                           |
//! | `post_paper`   | `id`, `author`, `title`, `keywords`, `content_addr`, `citations` |
//! | `review`       | `id`, `paper`, `reviewer`, `z_score`, `comment_addr`     |
//! | `reader_score` | `review`, `reader`, `value`                              |
//! | `seal`         | `height`, `miner`                                        |
//! | `phase`        | `phase`                                                  |
//!
//! Amounts are integer subunits (10⁻⁸ token) written as decimal strings.
//! Coinbase transactions are not logged; sealing regenerates them.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Address, Ledger, LedgerError, Transaction};
use crate::params::{EconomicParams, Phase};

#[derive(Debug, Clone, PartialEq)]
pub enum LogRecord {
    Tx(Transaction),
    Seal { height: u64, miner: Address },
    Phase { phase: Phase },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Marker {
    Seal { height: u64, miner: Address },
    Phase { phase: Phase },
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Rejected { line: usize, source: LedgerError },
    #[error("line {line}: replay diverged: {detail}")]
    Mismatch { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl LogRecord {
    pub fn to_json(&self) -> String {
        match self {
            LogRecord::Tx(tx) => serde_json::to_string(tx),
            LogRecord::Seal { height, miner } => serde_json::to_string(&Marker::Seal {
                height: *height,
                miner: miner.clone(),
            }),
            LogRecord::Phase { phase } => serde_json::to_string(&Marker::Phase { phase: *phase }),
        }
        .expect("log records serialize")
    }

    pub fn from_json(line: &str) -> Result<Self, serde_json::Error> {
        let value: serde_json::Value = serde_json::from_str(line)?;
        match value.get("kind").and_then(|k| k.as_str()) {
            Some("seal") | Some("phase") => Ok(match serde_json::from_value(value)? {
                Marker::Seal { height, miner } => LogRecord::Seal { height, miner },
                Marker::Phase { phase } => LogRecord::Phase { phase },
            }),
            _ => serde_json::from_value(value).map(LogRecord::Tx),
        }
    }
}

pub fn export_log<W: Write>(records: &[LogRecord], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json())?;
    }
    Ok(())
}

pub fn import_log<R: BufRead>(input: R) -> Result<Vec<LogRecord>, LogError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = LogRecord::from_json(&line).map_err(|source| LogError::Parse {
            line: i + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Rebuilds a ledger from genesis by re-executing every record.
pub fn replay(params: EconomicParams, records: &[LogRecord]) -> Result<Ledger, LogError> {
    let mut ledger = Ledger::new(params);
    for (i, record) in records.iter().enumerate() {
        let line = i + 1;
        let rejected = |source| LogError::Rejected { line, source };
        let mismatch =
            |what: &str, expected: &dyn std::fmt::Display, got: &dyn std::fmt::Display| {
                LogError::Mismatch {
                    line,
                    detail: format!("{what}: log has {expected}, replay produced {got}"),
                }
            };
        match record {
            LogRecord::Tx(Transaction::Registration {
                identity, address, ..
            }) => {
                let acct = ledger.register_account(identity).map_err(rejected)?;
                if acct.address != *address {
                    return Err(mismatch("address", address, &acct.address));
                }
            }
            LogRecord::Tx(Transaction::PostPaper {
                id,
                author,
                title,
                keywords,
                content_addr,
                citations,
            }) => {
                let paper = ledger
                    .post_paper(author, title, keywords, content_addr, citations)
                    .map_err(rejected)?;
                if paper.id != *id {
                    return Err(mismatch("paper id", id, &paper.id));
                }
            }
            LogRecord::Tx(Transaction::Review {
                id,
                paper,
                reviewer,
                z_score,
                comment_addr,
            }) => {
                let review = ledger
                    .submit_review(reviewer, paper, *z_score, comment_addr)
                    .map_err(rejected)?;
                if review.id != *id {
                    return Err(mismatch("review id", id, &review.id));
                }
            }
            LogRecord::Tx(Transaction::ReaderScore {
                review,
                reader,
                value,
            }) => {
                ledger
                    .submit_reader_score(reader, review, *value)
                    .map_err(rejected)?;
            }
            LogRecord::Tx(Transaction::Coinbase { .. }) => {}
            LogRecord::Seal { height, miner } => {
                let got = ledger.seal_block(miner).map_err(rejected)?.height;
                if got != *height {
                    return Err(mismatch("height", height, &got));
                }
            }
            LogRecord::Phase { phase } => match phase {
                Phase::Public => ledger.enter_public_phase(),
                Phase::Consortium if ledger.phase() == Phase::Consortium => {}
                Phase::Consortium => {
                    return Err(mismatch("phase", phase, &ledger.phase()));
                }
            },
        }
    }
    Ok(ledger)
}
