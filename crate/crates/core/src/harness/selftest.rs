//! Randomized invariant checks shared by the `selftest` subcommand and the
//! test suites.

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amount::{Amount, Ratio, RATIO_DENOM};
use crate::ledger::{Address, Ledger, PaperId, ReviewId};
use crate::params::{EconomicParams, Phase};
use crate::scoring::{self, trim_count, WeightedReview};
use crate::store::ContentAddress;
use crate::tokenomics::{Payee, Reason};

/// When the random run enters the public phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasePlan {
    ConsortiumOnly,
    /// Registrations first, then every block public.
    PublicOnly,
    /// Switch halfway through.
    Mixed,
}

/// Per-block check outcome of a random run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub blocks: usize,
    pub public_blocks: usize,
    pub posts: usize,
    pub reviews: usize,
    pub reader_scores: usize,
    pub releases: usize,
    pub violations: Vec<String>,
}

fn ratio_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Ratio {
    Ratio::from_f64(rng.random_range(lo..hi)).expect("ratio in range")
}

/// Random but valid mechanism constants.
pub fn random_params(rng: &mut ChaCha8Rng) -> EconomicParams {
    let mut p = EconomicParams {
        post_fee: Amount::from_subunits(rng.random_range(1..2_000_000_000)),
        fee_pool_share: ratio_in(rng, 0.01, 0.6),
        fee_citation_share: ratio_in(rng, 0.01, 0.39),
        block_mint: Amount::from_subunits(rng.random_range(1..20_000_000_000)),
        mint_pool_share: ratio_in(rng, 0.01, 0.6),
        mint_author_share: ratio_in(rng, 0.01, 0.39),
        quality_threshold: rng.random_range(20.0..70.0),
        reward_window: rng.random_range(1..15),
        pool_release: ratio_in(rng, 0.01, 0.99),
        miner_review_share: ratio_in(rng, 0.0, 0.1),
        min_reader_scores: rng.random_range(1..6),
        max_scores_per_paper: rng.random_range(1..6),
        phase: Phase::Consortium,
        registration_grant: Amount::from_subunits(rng.random_range(0..20_000_000_000)),
        trim_fraction: 0.1,
    };
    if rng.random_bool(0.2) {
        p = EconomicParams::default();
    }
    p.validate().expect("random params are valid");
    p
}

/// `F′ − ⌊αF′⌋·[released] + N·⌊a₁X⌋ + [public]·⌊b₁Y⌋` in plain integers.
pub fn pool_oracle(
    previous: Amount,
    params: &EconomicParams,
    posts: usize,
    phase: Phase,
    released: bool,
) -> Amount {
    let floor = |amount: Amount, r: Ratio| {
        amount.subunits() * r.parts_per_billion() as u128 / RATIO_DENOM as u128
    };
    let mut f = previous.subunits();
    if released {
        f -= floor(previous, params.pool_release);
    }
    f += posts as u128 * floor(params.post_fee, params.fee_pool_share);
    if phase == Phase::Public {
        f += floor(params.block_mint, params.mint_pool_share);
    }
    Amount::from_subunits(f)
}

/// Rule invariants on the whole ledger: conservation, identity bijection,
/// conflict of interest, flooding cap, and S/W consistency.
pub fn ledger_violations(ledger: &Ledger) -> Vec<String> {
    let mut out = Vec::new();
    if !ledger.conservation_holds() {
        out.push(format!(
            "conservation: balances {} + pool {} + burned {} != minted {}",
            ledger.total_balances(),
            ledger.pool().balance,
            ledger.burned(),
            ledger.minted()
        ));
    }
    let mut identities = BTreeSet::new();
    for acct in ledger.accounts() {
        if !identities.insert(acct.identity.clone())
            || ledger.address_of(&acct.identity) != Some(&acct.address)
        {
            out.push(format!("identity bijection broken for {}", acct.identity));
        }
    }
    let mut per_reader: BTreeMap<(PaperId, Address), usize> = BTreeMap::new();
    for review in ledger.reviews() {
        let mut seen = BTreeSet::new();
        for (reader, _) in &review.reader_scores {
            if ledger.is_reviewer_of(&review.paper, reader) {
                out.push(format!("reviewer {reader} scored review {}", review.id));
            }
            if !seen.insert(reader.clone()) {
                out.push(format!("{reader} scored review {} twice", review.id));
            }
            *per_reader
                .entry((review.paper.clone(), reader.clone()))
                .or_default() += 1;
        }
    }
    let cap = ledger.params().max_scores_per_paper;
    for ((paper, reader), n) in per_reader {
        if n > cap {
            out.push(format!("{reader} scored {n} reviews of {paper}, cap {cap}"));
        }
    }
    out
}

const FULL_CHECK_EVERY: usize = 25;

/// Drives a ledger through `blocks` random blocks and checks the
/// settlement identities after each seal.
pub fn random_run(seed: u64, blocks: usize, plan: PhasePlan) -> (Ledger, RunStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = random_params(&mut rng);
    let mut ledger = Ledger::new(params.clone());
    let mut stats = RunStats::default();
    let mut users: Vec<Address> = Vec::new();
    let mut papers: Vec<PaperId> = Vec::new();
    let mut reviews: Vec<ReviewId> = Vec::new();
    let mut next_user = 0usize;

    let mut register = |ledger: &mut Ledger, users: &mut Vec<Address>| {
        let acct = ledger
            .register_account(&format!("user{next_user}@selftest"))
            .expect("fresh identity");
        next_user += 1;
        users.push(acct.address);
    };
    for _ in 0..12 {
        register(&mut ledger, &mut users);
    }
    if plan == PhasePlan::PublicOnly {
        ledger.enter_public_phase();
    }

    for b in 0..blocks {
        if plan == PhasePlan::Mixed && b == blocks / 2 {
            ledger.enter_public_phase();
        }
        if users.len() < 60 && rng.random_bool(0.3) {
            register(&mut ledger, &mut users);
        }
        for _ in 0..rng.random_range(0..3) {
            let author = &users[rng.random_range(0..users.len())];
            let k = rng.random_range(0..4);
            let cites: Vec<PaperId> = (0..k)
                .filter(|_| !papers.is_empty())
                .map(|_| papers[rng.random_range(0..papers.len())].clone())
                .collect();
            let title = format!("paper {b}-{}", rng.random_range(0..1000u32));
            let content = ContentAddress::of(title.as_bytes());
            if let Ok(p) = ledger.post_paper(author, &title, &[], &content, &cites) {
                papers.push(p.id);
                stats.posts += 1;
            }
        }
        if !papers.is_empty() {
            for _ in 0..rng.random_range(0..4) {
                let reviewer = &users[rng.random_range(0..users.len())];
                let paper = &papers[papers.len() - 1 - rng.random_range(0..papers.len().min(8))];
                let z = rng.random_range(0.0..=100.0);
                let comment = ContentAddress::of(format!("{b}{reviewer}{paper}").as_bytes());
                if let Ok(r) = ledger.submit_review(reviewer, paper, z, &comment) {
                    reviews.push(r.id);
                    stats.reviews += 1;
                }
            }
        }
        if !reviews.is_empty() {
            for _ in 0..rng.random_range(0..25) {
                let reader = &users[rng.random_range(0..users.len())];
                let review =
                    &reviews[reviews.len() - 1 - rng.random_range(0..reviews.len().min(12))];
                let value = rng.random_range(30.0..=100.0);
                if ledger.submit_reader_score(reader, review, value).is_ok() {
                    stats.reader_scores += 1;
                }
            }
        }

        let previous = ledger.pool().balance;
        let miner = users[rng.random_range(0..users.len())].clone();
        let block = ledger
            .seal_block(&miner)
            .expect("miner is registered")
            .clone();
        stats.blocks += 1;
        if block.phase == Phase::Public {
            stats.public_blocks += 1;
        }

        // Review eligibility is recomputed from the ledger, not read from the block.
        let h = block.height;
        let window = h.saturating_sub(params.reward_window)..h;
        let eligible = ledger.reviews().any(|r| {
            window.contains(&r.recorded_at)
                && crate::tokenomics::excess_weight(r.effective_score, params.quality_threshold) > 0
        });
        let released = eligible && !params.pool_release.of(previous).is_zero();
        if released {
            stats.releases += 1;
        }
        let expected = pool_oracle(previous, &params, block.posts(), block.phase, released);
        if ledger.pool().balance != expected {
            stats.violations.push(format!(
                "block {h}: pool {} != recurrence {expected}",
                ledger.pool().balance
            ));
        }

        let net: i128 = block.settlement.iter().map(|e| e.amount).sum();
        if net != block.minted.to_signed() {
            stats.violations.push(format!(
                "block {h}: settlement nets {net}, minted {}",
                block.minted
            ));
        }
        let post_total: i128 = block
            .settlement
            .iter()
            .filter(|e| e.reason == Reason::PostFee)
            .map(|e| e.amount)
            .sum();
        if post_total != -(params.post_fee.to_signed() * block.posts() as i128) {
            stats
                .violations
                .push(format!("block {h}: post fees {post_total}"));
        }
        if block.phase == Phase::Public {
            let mint_side: i128 = block
                .settlement
                .iter()
                .filter(|e| matches!(e.reason, Reason::AuthorReward | Reason::Coinbase))
                .map(|e| e.amount)
                .sum::<i128>()
                + params.mint_pool_share.of(params.block_mint).to_signed();
            if mint_side != params.block_mint.to_signed() {
                stats
                    .violations
                    .push(format!("block {h}: coinbase split {mint_side} != Y"));
            }
            let burned: i128 = block
                .settlement
                .iter()
                .filter(|e| e.payee == Payee::Burn)
                .map(|e| e.amount)
                .sum();
            if burned != block.burned.to_signed() {
                stats
                    .violations
                    .push(format!("block {h}: burn rows {burned} != {}", block.burned));
            }
        }
        if !ledger.conservation_holds() {
            stats
                .violations
                .push(format!("block {h}: conservation broken"));
        }
        // The whole-ledger scans are quadratic over a run; sample them.
        if b % FULL_CHECK_EVERY != 0 && b + 1 != blocks {
            continue;
        }
        for v in ledger_violations(&ledger) {
            stats.violations.push(format!("block {h}: {v}"));
        }
        for paper in ledger.papers() {
            let weighted: Vec<WeightedReview> = paper
                .reviews
                .iter()
                .map(|id| {
                    let r = ledger.review(id).expect("indexed review");
                    WeightedReview {
                        z_score: r.z_score,
                        effective_score: r.effective_score,
                    }
                })
                .collect();
            if scoring::paper_score(&weighted) != paper.score {
                stats
                    .violations
                    .push(format!("block {h}: stale score on {}", paper.id));
            }
        }
    }
    (ledger, stats)
}

/// Sort, drop `floor(trim · n)` from each end, average the rest in order.
/// Written independently of [`scoring::trimmed_mean`].
pub fn naive_trimmed_mean(values: &[f64], trim: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    // Insertion sort keeps this independent of the library sort.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    let k = trim_count(v.len(), trim);
    let mut sum = 0.0;
    let mut count = 0usize;
    for x in &v[k..v.len() - k] {
        sum += *x;
        count += 1;
    }
    sum / count as f64
}

/// Compares the library trimmed mean with [`naive_trimmed_mean`] on random
/// vectors of length 1..=`max_len`. Returns the number of mismatches.
pub fn trimmed_mean_mismatches(seed: u64, vectors: usize, max_len: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..vectors)
        .filter(|_| {
            let n = rng.random_range(1..=max_len);
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    if rng.random_bool(0.2) {
                        rng.random_range(0..=100u32) as f64
                    } else {
                        rng.random_range(0.0..=100.0)
                    }
                })
                .collect();
            let lib = scoring::trimmed_mean(&v, 0.1).expect("non-empty");
            lib.to_bits() != naive_trimmed_mean(&v, 0.1).to_bits()
        })
        .count()
}

/// Counts random inputs whose paper score leaves the hull of positive-weight Z.
pub fn convexity_violations(seed: u64, cases: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .filter(|_| {
            let n = rng.random_range(1..=50);
            let reviews: Vec<WeightedReview> = (0..n)
                .map(|_| WeightedReview {
                    z_score: rng.random_range(0.0..=100.0),
                    effective_score: if rng.random_bool(0.3) {
                        0.0
                    } else {
                        rng.random_range(0.0..=100.0)
                    },
                })
                .collect();
            let s = scoring::paper_score(&reviews);
            let positive: Vec<f64> = reviews
                .iter()
                .filter(|r| r.effective_score > 0.0)
                .map(|r| r.z_score)
                .collect();
            if positive.is_empty() {
                return s != 0.0;
            }
            let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            !(lo <= s && s <= hi)
        })
        .count()
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// The invariant suite run by `pubchain selftest`.
pub fn selftest(seed: u64) -> Vec<CheckResult> {
    let mut results = Vec::new();
    for (name, plan, offset) in [
        (
            "conservation and pool recurrence, consortium phase",
            PhasePlan::ConsortiumOnly,
            0,
        ),
        (
            "conservation and pool recurrence, public phase",
            PhasePlan::PublicOnly,
            1,
        ),
        (
            "conservation and pool recurrence, phase switch",
            PhasePlan::Mixed,
            2,
        ),
    ] {
        let (_, stats) = random_run(seed.wrapping_add(offset), 1000, plan);
        results.push(CheckResult {
            name,
            passed: stats.violations.is_empty(),
            detail: match stats.violations.first() {
                Some(v) => format!("{} violations, first: {v}", stats.violations.len()),
                None => format!(
                    "{} blocks, {} posts, {} reviews, {} reader scores, {} releases",
                    stats.blocks, stats.posts, stats.reviews, stats.reader_scores, stats.releases
                ),
            },
        });
    }
    let mismatches = trimmed_mean_mismatches(seed, 10_000, 500);
    results.push(CheckResult {
        name: "trimmed mean matches sort-drop-average oracle",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in 10000 vectors"),
    });
    let outside = convexity_violations(seed, 10_000);
    results.push(CheckResult {
        name: "paper score is a convex combination",
        passed: outside == 0,
        detail: format!("{outside} violations in 10000 inputs"),
    });
    results
}
