use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::amount::Amount;
use crate::params::Phase;
use crate::store::ContentAddress;
use crate::tokenomics::{BonusPool, SettlementEntry};

/// Opaque ledger address of an account.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(String);

impl Address {
    pub fn new(s: impl Into<String>) -> Self {
        Address(s.into())
    }

    /// Address derived from a registered identity.
    pub fn for_identity(identity: &str, attempt: u32) -> Self {
        let mut h = Sha256::new();
        h.update(b"pubchain-address\0");
        h.update(identity.as_bytes());
        h.update(attempt.to_le_bytes());
        Address(format!("pc{}", &hex::encode(h.finalize())[..40]))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Hash of a transaction, lowercase hex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TxHash(String);

impl TxHash {
    pub(crate) fn compute(kind: &str, seq: u64, fields: &[&str]) -> Self {
        let mut h = Sha256::new();
        h.update(kind.as_bytes());
        h.update(seq.to_le_bytes());
        for f in fields {
            h.update((f.len() as u64).to_le_bytes());
            h.update(f.as_bytes());
        }
        TxHash(hex::encode(h.finalize()))
    }

    pub fn new(s: impl Into<String>) -> Self {
        TxHash(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TxHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type PaperId = TxHash;
pub type ReviewId = TxHash;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    /// External identity such as an affiliation email or ORCID.
    pub identity: String,
    pub address: Address,
    pub balance: Amount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paper {
    pub id: PaperId,
    pub author: Address,
    pub title: String,
    pub keywords: Vec<String>,
    pub content_addr: ContentAddress,
    /// Registered papers cited by this one; K is the length.
    pub citations: Vec<PaperId>,
    /// Current review score S_i.
    pub score: f64,
    pub published_at: u64,
    pub reviews: Vec<ReviewId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub id: ReviewId,
    pub paper: PaperId,
    pub reviewer: Address,
    /// Reviewer's numerical score Z.
    pub z_score: f64,
    pub comment_addr: ContentAddress,
    pub reader_scores: Vec<(Address, f64)>,
    /// Effective score W, refreshed when a block is sealed.
    pub effective_score: f64,
    pub recorded_at: u64,
    /// Set when the including block is sealed.
    pub recording_miner: Option<Address>,
}

impl Review {
    pub fn reader_values(&self) -> Vec<f64> {
        self.reader_scores.iter().map(|(_, v)| *v).collect()
    }
}

/// A transaction included in a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transaction {
    Registration {
        identity: String,
        address: Address,
        grant: Amount,
    },
    PostPaper {
        id: PaperId,
        author: Address,
        title: String,
        keywords: Vec<String>,
        content_addr: ContentAddress,
        citations: Vec<PaperId>,
    },
    Review {
        id: ReviewId,
        paper: PaperId,
        reviewer: Address,
        z_score: f64,
        comment_addr: ContentAddress,
    },
    ReaderScore {
        review: ReviewId,
        reader: Address,
        value: f64,
    },
    Coinbase {
        miner: Address,
        amount: Amount,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub miner: Address,
    pub phase: Phase,
    pub transactions: Vec<Transaction>,
    pub settlement: Vec<SettlementEntry>,
    pub pool: BonusPool,
    /// Whether the αF′ tranche was paid out in this block.
    pub pool_released: bool,
    pub minted: Amount,
    pub burned: Amount,
}

impl Block {
    pub fn posts(&self) -> usize {
        self.transactions
            .iter()
            .filter(|t| matches!(t, Transaction::PostPaper { .. }))
            .count()
    }
}
