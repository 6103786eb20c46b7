//! Append-only ledger of publication activity.
//!
//! Operations validate against the current state and take effect
//! immediately for validation purposes, but every balance movement except
//! registration grants happens when the pending block is sealed. Sealing
//! refreshes review and paper scores and applies the block's settlement in
//! one step.

mod log;
mod types;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use self::log::{export_log, import_log, replay, LogError, LogRecord};
pub use self::types::{
    Account, Address, Block, Paper, PaperId, Review, ReviewId, Transaction, TxHash,
};

use crate::amount::Amount;
use crate::params::{EconomicParams, Phase};
use crate::scoring::{self, WeightedReview};
use crate::store::ContentAddress;
use crate::tokenomics::{self, BlockActivity, BonusPool, Payee, PostActivity, ReviewStake};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("identity `{0}` is already linked to an address")]
    DuplicateIdentity(String),
    #[error("unknown account {0}")]
    UnknownAccount(Address),
    #[error("balance {available} is below the required {required}")]
    InsufficientBalance { available: Amount, required: Amount },
    #[error("a paper with this title and content address already exists")]
    DuplicatePaper,
    #[error("unknown paper {0}")]
    UnknownPaper(PaperId),
    #[error("unknown review {0}")]
    UnknownReview(ReviewId),
    #[error("{0} already reviewed this paper")]
    DuplicateReview(Address),
    #[error("authors cannot review their own papers")]
    SelfReview,
    #[error("{0} has a conflict of interest on this paper")]
    ConflictOfInterest(Address),
    #[error("{0} already scored the maximum number of reviews of this paper")]
    FloodingLimitExceeded(Address),
    #[error("{0} already scored this review")]
    DuplicateScore(Address),
    #[error("score {0} is outside [0, 100]")]
    InvalidScore(f64),
}

#[derive(Debug, Clone)]
pub struct Ledger {
    params: EconomicParams,
    phase: Phase,
    accounts: BTreeMap<Address, Account>,
    identities: BTreeMap<String, Address>,
    papers: BTreeMap<PaperId, Paper>,
    paper_keys: BTreeSet<(String, ContentAddress)>,
    reviews: BTreeMap<ReviewId, Review>,
    /// (paper, reviewer) pairs.
    reviewers: BTreeSet<(PaperId, Address)>,
    /// Reviews of a paper scored by a reader.
    reader_counts: BTreeMap<(PaperId, Address), usize>,
    blocks: Vec<Block>,
    pending: Vec<Transaction>,
    pending_debits: BTreeMap<Address, Amount>,
    pool: BonusPool,
    minted: Amount,
    burned: Amount,
    log: Vec<LogRecord>,
    tx_seq: u64,
}

impl Ledger {
    /// Empty ledger; the initial phase is taken from `params.phase`.
    pub fn new(params: EconomicParams) -> Self {
        Ledger {
            phase: params.phase,
            params,
            accounts: BTreeMap::new(),
            identities: BTreeMap::new(),
            papers: BTreeMap::new(),
            paper_keys: BTreeSet::new(),
            reviews: BTreeMap::new(),
            reviewers: BTreeSet::new(),
            reader_counts: BTreeMap::new(),
            blocks: Vec::new(),
            pending: Vec::new(),
            pending_debits: BTreeMap::new(),
            pool: BonusPool::default(),
            minted: Amount::ZERO,
            burned: Amount::ZERO,
            log: Vec::new(),
            tx_seq: 0,
        }
    }

    pub fn params(&self) -> &EconomicParams {
        &self.params
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Height the next sealed block will get.
    pub fn next_height(&self) -> u64 {
        self.blocks.len() as u64
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn pending(&self) -> &[Transaction] {
        &self.pending
    }

    pub fn account(&self, addr: &Address) -> Option<&Account> {
        self.accounts.get(addr)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn address_of(&self, identity: &str) -> Option<&Address> {
        self.identities.get(identity)
    }

    pub fn balance(&self, addr: &Address) -> Amount {
        self.accounts
            .get(addr)
            .map(|a| a.balance)
            .unwrap_or_default()
    }

    pub fn paper(&self, id: &PaperId) -> Option<&Paper> {
        self.papers.get(id)
    }

    pub fn papers(&self) -> impl Iterator<Item = &Paper> {
        self.papers.values()
    }

    pub fn review(&self, id: &ReviewId) -> Option<&Review> {
        self.reviews.get(id)
    }

    pub fn reviews(&self) -> impl Iterator<Item = &Review> {
        self.reviews.values()
    }

    pub fn pool(&self) -> BonusPool {
        self.pool
    }

    /// Registration grants plus coinbase issues so far.
    pub fn minted(&self) -> Amount {
        self.minted
    }

    pub fn burned(&self) -> Amount {
        self.burned
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn is_reviewer_of(&self, paper: &PaperId, who: &Address) -> bool {
        self.reviewers.contains(&(paper.clone(), who.clone()))
    }

    pub fn reader_score_count(&self, paper: &PaperId, reader: &Address) -> usize {
        self.reader_counts
            .get(&(paper.clone(), reader.clone()))
            .copied()
            .unwrap_or(0)
    }

    /// Switches to the public-chain phase; applies from the next sealed block.
    pub fn enter_public_phase(&mut self) {
        if self.phase != Phase::Public {
            self.phase = Phase::Public;
            self.log.push(LogRecord::Phase {
                phase: Phase::Public,
            });
        }
    }

    fn next_seq(&mut self) -> u64 {
        let s = self.tx_seq;
        self.tx_seq += 1;
        s
    }

    fn require_account(&self, addr: &Address) -> Result<&Account, LedgerError> {
        self.accounts
            .get(addr)
            .ok_or_else(|| LedgerError::UnknownAccount(addr.clone()))
    }

    fn push_tx(&mut self, tx: Transaction) {
        self.log.push(LogRecord::Tx(tx.clone()));
        self.pending.push(tx);
    }

    pub fn register_account(&mut self, identity: &str) -> Result<Account, LedgerError> {
        if self.identities.contains_key(identity) {
            return Err(LedgerError::DuplicateIdentity(identity.to_string()));
        }
        let mut attempt = 0;
        let address = loop {
            let a = Address::for_identity(identity, attempt);
            if !self.accounts.contains_key(&a) {
                break a;
            }
            attempt += 1;
        };
        let grant = match self.phase {
            Phase::Consortium => self.params.registration_grant,
            Phase::Public => Amount::ZERO,
        };
        let account = Account {
            identity: identity.to_string(),
            address: address.clone(),
            balance: grant,
        };
        self.minted += grant;
        self.identities
            .insert(identity.to_string(), address.clone());
        self.accounts.insert(address.clone(), account.clone());
        self.next_seq();
        self.push_tx(Transaction::Registration {
            identity: identity.to_string(),
            address,
            grant,
        });
        Ok(account)
    }

    /// Spendable balance: current balance minus fees owed by pending posts.
    pub fn available_balance(&self, addr: &Address) -> Amount {
        let owed = self.pending_debits.get(addr).copied().unwrap_or_default();
        self.balance(addr).saturating_sub(owed)
    }

    pub fn post_paper(
        &mut self,
        author: &Address,
        title: &str,
        keywords: &[String],
        content_addr: &ContentAddress,
        citations: &[PaperId],
    ) -> Result<Paper, LedgerError> {
        self.require_account(author)?;
        let fee = self.params.post_fee;
        let available = self.available_balance(author);
        if available < fee {
            return Err(LedgerError::InsufficientBalance {
                available,
                required: fee,
            });
        }
        let key = (title.to_string(), content_addr.clone());
        if self.paper_keys.contains(&key) {
            return Err(LedgerError::DuplicatePaper);
        }
        let mut cited = Vec::new();
        for c in citations {
            if !self.papers.contains_key(c) {
                ::log::warn!("dropping citation of unregistered paper {c}");
            } else if !cited.contains(c) {
                cited.push(c.clone());
            }
        }
        let seq = self.next_seq();
        let id = TxHash::compute(
            "post",
            seq,
            &[author.as_str(), title, content_addr.as_str()],
        );
        let paper = Paper {
            id: id.clone(),
            author: author.clone(),
            title: title.to_string(),
            keywords: keywords.to_vec(),
            content_addr: content_addr.clone(),
            citations: cited.clone(),
            score: 0.0,
            published_at: self.next_height(),
            reviews: Vec::new(),
        };
        self.paper_keys.insert(key);
        self.papers.insert(id.clone(), paper.clone());
        *self.pending_debits.entry(author.clone()).or_default() += fee;
        // The log keeps the citations as submitted so replay sees the same input.
        self.log.push(LogRecord::Tx(Transaction::PostPaper {
            id: id.clone(),
            author: author.clone(),
            title: title.to_string(),
            keywords: keywords.to_vec(),
            content_addr: content_addr.clone(),
            citations: citations.to_vec(),
        }));
        self.pending.push(Transaction::PostPaper {
            id,
            author: author.clone(),
            title: title.to_string(),
            keywords: keywords.to_vec(),
            content_addr: content_addr.clone(),
            citations: cited,
        });
        Ok(paper)
    }

    pub fn submit_review(
        &mut self,
        reviewer: &Address,
        paper_id: &PaperId,
        z_score: f64,
        comment_addr: &ContentAddress,
    ) -> Result<Review, LedgerError> {
        self.require_account(reviewer)?;
        scoring::check_score(z_score).map_err(|_| LedgerError::InvalidScore(z_score))?;
        let paper = self
            .papers
            .get(paper_id)
            .ok_or_else(|| LedgerError::UnknownPaper(paper_id.clone()))?;
        if paper.author == *reviewer {
            return Err(LedgerError::SelfReview);
        }
        if self.is_reviewer_of(paper_id, reviewer) {
            return Err(LedgerError::DuplicateReview(reviewer.clone()));
        }
        if self.reader_score_count(paper_id, reviewer) > 0 {
            return Err(LedgerError::ConflictOfInterest(reviewer.clone()));
        }
        let seq = self.next_seq();
        let id = TxHash::compute(
            "review",
            seq,
            &[reviewer.as_str(), paper_id.as_str(), comment_addr.as_str()],
        );
        let review = Review {
            id: id.clone(),
            paper: paper_id.clone(),
            reviewer: reviewer.clone(),
            z_score,
            comment_addr: comment_addr.clone(),
            reader_scores: Vec::new(),
            effective_score: 0.0,
            recorded_at: self.next_height(),
            recording_miner: None,
        };
        self.reviewers.insert((paper_id.clone(), reviewer.clone()));
        self.papers
            .get_mut(paper_id)
            .expect("paper checked above")
            .reviews
            .push(id.clone());
        self.reviews.insert(id.clone(), review.clone());
        self.push_tx(Transaction::Review {
            id,
            paper: paper_id.clone(),
            reviewer: reviewer.clone(),
            z_score,
            comment_addr: comment_addr.clone(),
        });
        Ok(review)
    }

    pub fn submit_reader_score(
        &mut self,
        reader: &Address,
        review_id: &ReviewId,
        value: f64,
    ) -> Result<Review, LedgerError> {
        self.require_account(reader)?;
        scoring::check_score(value).map_err(|_| LedgerError::InvalidScore(value))?;
        let review = self
            .reviews
            .get(review_id)
            .ok_or_else(|| LedgerError::UnknownReview(review_id.clone()))?;
        let paper = review.paper.clone();
        if self.is_reviewer_of(&paper, reader) {
            return Err(LedgerError::ConflictOfInterest(reader.clone()));
        }
        if review.reader_scores.iter().any(|(r, _)| r == reader) {
            return Err(LedgerError::DuplicateScore(reader.clone()));
        }
        let count = self.reader_score_count(&paper, reader);
        if count >= self.params.max_scores_per_paper {
            return Err(LedgerError::FloodingLimitExceeded(reader.clone()));
        }
        self.reader_counts
            .insert((paper, reader.clone()), count + 1);
        let review = self
            .reviews
            .get_mut(review_id)
            .expect("review checked above");
        review.reader_scores.push((reader.clone(), value));
        let updated = review.clone();
        self.next_seq();
        self.push_tx(Transaction::ReaderScore {
            review: review_id.clone(),
            reader: reader.clone(),
            value,
        });
        Ok(updated)
    }

    /// Recomputes W for every review of `paper_id` and then S for the paper.
    fn rescore_paper(&mut self, paper_id: &PaperId) {
        let n_rs = self.params.min_reader_scores;
        let trim = self.params.trim_fraction;
        let review_ids = self.papers[paper_id].reviews.clone();
        let mut weighted = Vec::with_capacity(review_ids.len());
        for rid in &review_ids {
            let review = self.reviews.get_mut(rid).expect("indexed review exists");
            review.effective_score =
                scoring::effective_review_score(&review.reader_values(), n_rs, trim);
            weighted.push(WeightedReview {
                z_score: review.z_score,
                effective_score: review.effective_score,
            });
        }
        self.papers.get_mut(paper_id).expect("paper exists").score =
            scoring::paper_score(&weighted);
    }

    fn window_blocks(&self, height: u64) -> std::ops::Range<usize> {
        let start = height.saturating_sub(self.params.reward_window) as usize;
        start..height as usize
    }

    /// Seals the pending transactions into a new block mined by `miner`.
    pub fn seal_block(&mut self, miner: &Address) -> Result<&Block, LedgerError> {
        self.require_account(miner)?;
        let height = self.next_height();
        let mut transactions = std::mem::take(&mut self.pending);
        self.pending_debits.clear();

        let mut touched = BTreeSet::new();
        let mut posts = Vec::new();
        for tx in &transactions {
            match tx {
                Transaction::PostPaper {
                    author, citations, ..
                } => posts.push(PostActivity {
                    author: author.clone(),
                    cited_authors: citations
                        .iter()
                        .map(|c| self.papers[c].author.clone())
                        .collect(),
                }),
                Transaction::Review { id, paper, .. } => {
                    self.reviews
                        .get_mut(id)
                        .expect("pending review exists")
                        .recording_miner = Some(miner.clone());
                    touched.insert(paper.clone());
                }
                Transaction::ReaderScore { review, .. } => {
                    touched.insert(self.reviews[review].paper.clone());
                }
                Transaction::Registration { .. } | Transaction::Coinbase { .. } => {}
            }
        }
        for paper in &touched {
            self.rescore_paper(paper);
        }

        let window = self.window_blocks(height);
        let mut papers_in_window = Vec::new();
        let mut reviews_in_window = Vec::new();
        for block in &self.blocks[window] {
            for tx in &block.transactions {
                match tx {
                    Transaction::PostPaper { id, .. } => {
                        let p = &self.papers[id];
                        papers_in_window.push((p.author.clone(), p.score));
                    }
                    Transaction::Review { id, .. } => {
                        let r = &self.reviews[id];
                        reviews_in_window.push(ReviewStake {
                            reviewer: r.reviewer.clone(),
                            recording_miner: r.recording_miner.clone().expect("sealed review"),
                            effective_score: r.effective_score,
                        });
                    }
                    _ => {}
                }
            }
        }

        let activity = BlockActivity {
            height,
            miner: miner.clone(),
            phase: self.phase,
            posts,
            papers_in_window,
            reviews_in_window,
            pool: self.pool,
        };
        let settlement = tokenomics::settle_block(&activity, &self.params);

        // Debits first, then credits; every post debit was reserved at submission.
        let mut deltas: BTreeMap<Address, i128> = BTreeMap::new();
        for e in &settlement.entries {
            if let Payee::Account(a) = &e.payee {
                *deltas.entry(a.clone()).or_default() += e.amount;
            }
        }
        for (addr, delta) in deltas {
            let account = self
                .accounts
                .get_mut(&addr)
                .expect("settled account exists");
            let next = account.balance.to_signed() + delta;
            assert!(next >= 0, "settlement drove {addr} negative");
            account.balance = Amount::from_subunits(next as u128);
        }
        self.pool = settlement.pool;
        self.minted += settlement.minted;
        self.burned += settlement.burned;

        if self.phase == Phase::Public {
            transactions.push(Transaction::Coinbase {
                miner: miner.clone(),
                amount: settlement.minted,
            });
        }
        self.log.push(LogRecord::Seal {
            height,
            miner: miner.clone(),
        });
        self.blocks.push(Block {
            height,
            miner: miner.clone(),
            phase: self.phase,
            transactions,
            settlement: settlement.entries,
            pool: settlement.pool,
            pool_released: settlement.released,
            minted: settlement.minted,
            burned: settlement.burned,
        });
        Ok(self.blocks.last().expect("just pushed"))
    }

    /// Sum of all account balances.
    pub fn total_balances(&self) -> Amount {
        self.accounts.values().map(|a| a.balance).sum()
    }

    /// `Σ balances + pool + burned = minted`, exactly.
    pub fn conservation_holds(&self) -> bool {
        self.total_balances() + self.pool.balance + self.burned == self.minted
    }

    /// SHA-256 over a canonical serialization of the whole state.
    pub fn state_digest(&self) -> String {
        #[derive(Serialize)]
        struct Snapshot<'a> {
            phase: Phase,
            accounts: Vec<&'a Account>,
            papers: Vec<&'a Paper>,
            reviews: Vec<&'a Review>,
            blocks: &'a [Block],
            pending: &'a [Transaction],
            pool: BonusPool,
            minted: Amount,
            burned: Amount,
        }
        let snap = Snapshot {
            phase: self.phase,
            accounts: self.accounts.values().collect(),
            papers: self.papers.values().collect(),
            reviews: self.reviews.values().collect(),
            blocks: &self.blocks,
            pending: &self.pending,
            pool: self.pool,
            minted: self.minted,
            burned: self.burned,
        };
        let bytes = serde_json::to_vec(&snap).expect("state serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
