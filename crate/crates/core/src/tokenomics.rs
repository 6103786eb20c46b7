//! Per-block reward settlement.
//!
//! Everything here is a pure function of a snapshot of ledger activity. All
//! splits round down in subunits; remainders go to the block's miner, except
//! the author tranche of a block with no eligible paper, which is burned, and
//! the pool release of a block with no eligible review, which stays pooled.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::ledger::Address;
use crate::params::{EconomicParams, Phase};

/// Resolution of quantized score excesses used as integer reward weights.
const WEIGHT_SCALE: f64 = 1e9;

/// Integer weight `round(max(score − λ, 0) · 10⁹)`.
pub fn excess_weight(score: f64, threshold: f64) -> u128 {
    let excess = score - threshold;
    if excess.is_nan() || excess <= 0.0 {
        0
    } else {
        (excess * WEIGHT_SCALE).round() as u128
    }
}

/// Splits `tranche` proportionally to `weights`, rounding each share down.
/// Returns the shares and the undistributed remainder, or `None` when all
/// weights are zero.
pub fn split_proportional(tranche: Amount, weights: &[u128]) -> Option<(Vec<Amount>, Amount)> {
    let total: u128 = weights.iter().sum();
    if total == 0 {
        return None;
    }
    let shares: Vec<Amount> = weights
        .iter()
        .map(|&w| tranche.mul_div_floor(w, total))
        .collect();
    let paid: Amount = shares.iter().sum();
    Some((shares, tranche - paid))
}

/// Who a settlement row credits or debits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payee {
    Account(Address),
    Pool,
    Burn,
}

impl fmt::Display for Payee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payee::Account(a) => write!(f, "{a}"),
            Payee::Pool => f.write_str("pool"),
            Payee::Burn => f.write_str("burn"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    PostFee,
    Citation,
    AuthorReward,
    ReviewerReward,
    MinerBeta,
    MinerFee,
    Coinbase,
    Pool,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::PostFee => "post_fee",
            Reason::Citation => "citation",
            Reason::AuthorReward => "author_reward",
            Reason::ReviewerReward => "reviewer_reward",
            Reason::MinerBeta => "miner_beta",
            Reason::MinerFee => "miner_fee",
            Reason::Coinbase => "coinbase",
            Reason::Pool => "pool",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One balance movement. Positive amounts are credits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettlementEntry {
    pub payee: Payee,
    pub reason: Reason,
    pub amount: i128,
}

impl SettlementEntry {
    fn credit(payee: Payee, reason: Reason, amount: Amount) -> Self {
        SettlementEntry {
            payee,
            reason,
            amount: amount.to_signed(),
        }
    }

    fn debit(payee: Payee, reason: Reason, amount: Amount) -> Self {
        SettlementEntry {
            payee,
            reason,
            amount: -amount.to_signed(),
        }
    }
}

/// Split of one post fee X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeeSplit {
    pub pool_credit: Amount,
    /// One entry per registered cited paper, keyed by that paper's author.
    pub citation_credits: Vec<(Address, Amount)>,
    /// `(1 − a₁ − a₂)X` plus rounding dust, or `(1 − a₁)X` when nothing is cited.
    pub miner_fee: Amount,
}

impl FeeSplit {
    pub fn total(&self) -> Amount {
        self.pool_credit
            + self
                .citation_credits
                .iter()
                .map(|(_, a)| *a)
                .sum::<Amount>()
            + self.miner_fee
    }
}

pub fn distribute_post_fee(cited_authors: &[Address], params: &EconomicParams) -> FeeSplit {
    let fee = params.post_fee;
    let pool_credit = params.fee_pool_share.of(fee);
    let citation_total = params.fee_citation_share.of(fee);
    let citation_credits: Vec<(Address, Amount)> = if cited_authors.is_empty() {
        Vec::new()
    } else {
        let (each, _) = citation_total.div_rem(cited_authors.len() as u128);
        cited_authors.iter().map(|a| (a.clone(), each)).collect()
    };
    let cited: Amount = citation_credits.iter().map(|(_, a)| *a).sum();
    FeeSplit {
        pool_credit,
        miner_fee: fee - pool_credit - cited,
        citation_credits,
    }
}

/// Result of a proportional reward distribution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuthorPayout {
    pub rewards: Vec<(Address, Amount)>,
    /// Rounding remainder, paid to the miner.
    pub dust: Amount,
    /// Tranche withheld because no paper exceeded the threshold.
    pub burned: Amount,
}

/// `G_i = b₂Y · max(S_i − λ, 0) / Σ max(S_k − λ, 0)` over the papers in the window.
///
/// `papers` holds `(author, S_i)` pairs; `tranche` is `b₂Y`.
pub fn author_rewards(papers: &[(Address, f64)], tranche: Amount, threshold: f64) -> AuthorPayout {
    let weights: Vec<u128> = papers
        .iter()
        .map(|(_, s)| excess_weight(*s, threshold))
        .collect();
    match split_proportional(tranche, &weights) {
        None => AuthorPayout {
            rewards: Vec::new(),
            dust: Amount::ZERO,
            burned: tranche,
        },
        Some((shares, dust)) => AuthorPayout {
            rewards: papers
                .iter()
                .zip(shares)
                .filter(|(_, g)| !g.is_zero())
                .map(|((a, _), g)| (a.clone(), g))
                .collect(),
            dust,
            burned: Amount::ZERO,
        },
    }
}

/// A review eligible for pool rewards in the current block.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewStake {
    pub reviewer: Address,
    /// Miner of the block that recorded the review.
    pub recording_miner: Address,
    pub effective_score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewReward {
    pub reviewer: Address,
    pub reviewer_amount: Amount,
    pub miner: Address,
    pub miner_amount: Amount,
}

impl ReviewReward {
    /// `g_{i,j}` before the miner's share is taken out.
    pub fn gross(&self) -> Amount {
        self.reviewer_amount + self.miner_amount
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReviewerPayout {
    pub rewards: Vec<ReviewReward>,
    /// `αF′` when some review exceeded the threshold, zero otherwise.
    pub released: Amount,
    /// Part of `released` lost to rounding, paid to the block's miner.
    pub dust: Amount,
}

/// `g_{i,j} = αF · max(W_{i,j} − λ, 0) / Σ max(W − λ, 0)`; the reviewer keeps
/// `(1 − β)g` and the recording miner receives `βg`.
pub fn reviewer_rewards(
    reviews: &[ReviewStake],
    pool: Amount,
    params: &EconomicParams,
) -> ReviewerPayout {
    let weights: Vec<u128> = reviews
        .iter()
        .map(|r| excess_weight(r.effective_score, params.quality_threshold))
        .collect();
    let released = params.pool_release.of(pool);
    let Some((shares, dust)) = split_proportional(released, &weights) else {
        return ReviewerPayout::default();
    };
    let rewards = reviews
        .iter()
        .zip(shares)
        .filter(|(_, g)| !g.is_zero())
        .map(|(r, g)| {
            let miner_amount = params.miner_review_share.of(g);
            ReviewReward {
                reviewer: r.reviewer.clone(),
                reviewer_amount: g - miner_amount,
                miner: r.recording_miner.clone(),
                miner_amount,
            }
        })
        .collect();
    ReviewerPayout {
        rewards,
        released,
        dust,
    }
}

/// Reviewer bonus pool: `balance` is F, `previous` is F′.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BonusPool {
    pub balance: Amount,
    pub previous: Amount,
}

/// `F = (1 − α)F′ + a₁XN` in the consortium phase, `+ b₁Y` in the public
/// phase. When the release tranche was not paid out (`released == false`) it
/// stays in the pool, so `F = F′ + a₁XN (+ b₁Y)`.
pub fn update_pool(
    pool: BonusPool,
    params: &EconomicParams,
    papers_this_block: usize,
    phase: Phase,
    released: bool,
) -> BonusPool {
    let previous = pool.balance;
    let retained = if released {
        previous - params.pool_release.of(previous)
    } else {
        previous
    };
    let fees = params
        .fee_pool_share
        .of(params.post_fee)
        .times(papers_this_block as u128);
    let mint = match phase {
        Phase::Public => params.mint_pool_share.of(params.block_mint),
        Phase::Consortium => Amount::ZERO,
    };
    BonusPool {
        balance: retained + fees + mint,
        previous,
    }
}

/// Split of one coinbase Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoinbaseSplit {
    pub pool: Amount,
    pub authors: Amount,
    pub miner: Amount,
}

pub fn coinbase_split(params: &EconomicParams) -> CoinbaseSplit {
    let y = params.block_mint;
    let pool = params.mint_pool_share.of(y);
    let authors = params.mint_author_share.of(y);
    CoinbaseSplit {
        pool,
        authors,
        miner: y - pool - authors,
    }
}

/// A paper posted in the block being sealed.
#[derive(Debug, Clone, PartialEq)]
pub struct PostActivity {
    pub author: Address,
    /// Authors of the paper's registered citations, one per cited paper.
    pub cited_authors: Vec<Address>,
}

/// Everything settlement needs to know about one block.
#[derive(Debug, Clone)]
pub struct BlockActivity {
    pub height: u64,
    pub miner: Address,
    pub phase: Phase,
    pub posts: Vec<PostActivity>,
    /// `(author, S_i)` for papers published in the previous M blocks.
    pub papers_in_window: Vec<(Address, f64)>,
    /// Reviews recorded in the previous M blocks.
    pub reviews_in_window: Vec<ReviewStake>,
    /// Pool before this block (F′).
    pub pool: BonusPool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settlement {
    pub entries: Vec<SettlementEntry>,
    pub pool: BonusPool,
    pub minted: Amount,
    pub burned: Amount,
    /// Whether the αF′ tranche left the pool.
    pub released: bool,
}

impl Settlement {
    /// Net change of every account-held balance, pool and burn combined.
    pub fn net(&self) -> i128 {
        self.entries.iter().map(|e| e.amount).sum()
    }
}

/// Composes the fee split, reviewer rewards, pool update, author rewards and
/// coinbase residue for one block.
pub fn settle_block(activity: &BlockActivity, params: &EconomicParams) -> Settlement {
    let miner = Payee::Account(activity.miner.clone());
    let mut entries = Vec::new();

    for post in &activity.posts {
        entries.push(SettlementEntry::debit(
            Payee::Account(post.author.clone()),
            Reason::PostFee,
            params.post_fee,
        ));
        let split = distribute_post_fee(&post.cited_authors, params);
        entries.push(SettlementEntry::credit(
            Payee::Pool,
            Reason::Pool,
            split.pool_credit,
        ));
        for (author, amount) in split.citation_credits {
            entries.push(SettlementEntry::credit(
                Payee::Account(author),
                Reason::Citation,
                amount,
            ));
        }
        entries.push(SettlementEntry::credit(
            miner.clone(),
            Reason::MinerFee,
            split.miner_fee,
        ));
    }

    let reviewers = reviewer_rewards(&activity.reviews_in_window, activity.pool.balance, params);
    let released = !reviewers.released.is_zero();
    if released {
        entries.push(SettlementEntry::debit(
            Payee::Pool,
            Reason::Pool,
            reviewers.released,
        ));
        for r in &reviewers.rewards {
            entries.push(SettlementEntry::credit(
                Payee::Account(r.reviewer.clone()),
                Reason::ReviewerReward,
                r.reviewer_amount,
            ));
            entries.push(SettlementEntry::credit(
                Payee::Account(r.miner.clone()),
                Reason::MinerBeta,
                r.miner_amount,
            ));
        }
        entries.push(SettlementEntry::credit(
            miner.clone(),
            Reason::MinerFee,
            reviewers.dust,
        ));
    }
    let pool = update_pool(
        activity.pool,
        params,
        activity.posts.len(),
        activity.phase,
        released,
    );

    let mut minted = Amount::ZERO;
    let mut burned = Amount::ZERO;
    if activity.phase == Phase::Public {
        let coinbase = coinbase_split(params);
        minted = params.block_mint;
        entries.push(SettlementEntry::credit(
            Payee::Pool,
            Reason::Pool,
            coinbase.pool,
        ));
        let authors = author_rewards(
            &activity.papers_in_window,
            coinbase.authors,
            params.quality_threshold,
        );
        for (author, amount) in authors.rewards {
            entries.push(SettlementEntry::credit(
                Payee::Account(author),
                Reason::AuthorReward,
                amount,
            ));
        }
        if !authors.burned.is_zero() {
            entries.push(SettlementEntry::credit(
                Payee::Burn,
                Reason::AuthorReward,
                authors.burned,
            ));
            burned = authors.burned;
        }
        entries.push(SettlementEntry::credit(
            miner,
            Reason::Coinbase,
            coinbase.miner + authors.dust,
        ));
    }

    entries.retain(|e| e.amount != 0);
    Settlement {
        entries,
        pool,
        minted,
        burned,
        released,
    }
}
