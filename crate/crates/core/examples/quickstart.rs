//! Registers three accounts, posts and reviews a paper, and prints balances.

use pubchain::store::{BlobStore, MemStore};
use pubchain::{EconomicParams, Ledger};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = MemStore::new();
    let mut ledger = Ledger::new(EconomicParams::default());
    let author = ledger.register_account("author@example.org")?.address;
    let reviewer = ledger.register_account("reviewer@example.org")?.address;
    let miner = ledger.register_account("miner@example.org")?.address;

    let body = store.put(b"An essay on open review.")?;
    let paper = ledger.post_paper(&author, "Open review", &[], &body, &[])?;
    let comment = store.put(b"Sound argument, weak evaluation.")?;
    ledger.submit_review(&reviewer, &paper.id, 65.0, &comment)?;
    ledger.seal_block(&miner)?;

    for acct in ledger.accounts() {
        println!("{:<22} {}", acct.identity, acct.balance);
    }
    println!("pool {}", ledger.pool().balance);
    assert!(ledger.conservation_holds());
    Ok(())
}
