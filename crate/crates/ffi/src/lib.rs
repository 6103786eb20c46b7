//! C ABI over the pubchain ledger, scoring and sweep engine.
//!
//! Every fallible call returns a [`PcStatus`]; on failure the message is
//! available from [`pc_last_error`] on the same thread. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`pc_string_free`]. Amounts cross the boundary as `u64` subunits
//! (10⁻⁸ token).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pubchain::harness::sweep::{run_sweep, sweep_csv, SweepSpec};
use pubchain::ledger::{PaperId, ReviewId};
use pubchain::scoring;
use pubchain::store::ContentAddress;
use pubchain::{Address, Amount, EconomicParams, Ledger, LedgerError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    /// Not UTF-8, not a number in range, or otherwise malformed.
    InvalidArgument = 2,
    /// Unknown account, paper or review.
    NotFound = 3,
    /// A ledger validation rule refused the action.
    Rejected = 4,
    InsufficientBalance = 5,
    /// Bad parameter or sweep specification text.
    Config = 6,
    /// The value does not fit the output type.
    Overflow = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

/// Opaque ledger handle.
pub struct PcLedger {
    inner: Ledger,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

struct Failure(PcStatus, String);

impl From<LedgerError> for Failure {
    fn from(e: LedgerError) -> Self {
        let status = match e {
            LedgerError::UnknownAccount(_)
            | LedgerError::UnknownPaper(_)
            | LedgerError::UnknownReview(_) => PcStatus::NotFound,
            LedgerError::InsufficientBalance { .. } => PcStatus::InsufficientBalance,
            LedgerError::InvalidScore(_) => PcStatus::InvalidArgument,
            _ => PcStatus::Rejected,
        };
        Failure(status, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            PcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PcStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ledger<'a>(l: *mut PcLedger) -> Result<&'a mut Ledger, Failure> {
    l.as_mut()
        .map(|h| &mut h.inner)
        .ok_or_else(|| null("ledger"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, value: &str) -> Result<(), Failure> {
    let s = CString::new(value)
        .map_err(|_| Failure(PcStatus::Internal, "string contains NUL".into()))?;
    write(out, s.into_raw(), "output string")
}

fn subunits(amount: Amount) -> Result<u64, Failure> {
    u64::try_from(amount.subunits()).map_err(|_| {
        Failure(
            PcStatus::Overflow,
            format!("{amount} does not fit in u64 subunits"),
        )
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a ledger. `params` is a flat `key = value` text or NULL for the
/// defaults.
///
/// # Safety
/// `params` must be NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_ledger_new(params: *const c_char, out: *mut *mut PcLedger) -> PcStatus {
    guard(|| {
        let params = if params.is_null() {
            EconomicParams::default()
        } else {
            EconomicParams::from_kv_str(text(params, "params")?)
                .map_err(|e| Failure(PcStatus::Config, e.to_string()))?
        };
        let handle = Box::new(PcLedger {
            inner: Ledger::new(params),
        });
        write(out, Box::into_raw(handle), "out")
    })
}

/// Destroys a ledger. NULL is ignored.
///
/// # Safety
/// `l` must come from [`pc_ledger_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pc_ledger_free(l: *mut PcLedger) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Switches to the public phase from the next sealed block.
///
/// # Safety
/// `l` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_enter_public_phase(l: *mut PcLedger) -> PcStatus {
    guard(|| {
        ledger(l)?.enter_public_phase();
        Ok(())
    })
}

/// Registers `identity` and writes the new address to `out_address`.
///
/// # Safety
/// `l` must be a live handle, `identity` NUL-terminated, `out_address` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_register(
    l: *mut PcLedger,
    identity: *const c_char,
    out_address: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let acct = ledger(l)?.register_account(text(identity, "identity")?)?;
        write_string(out_address, acct.address.as_str())
    })
}

/// Submits a paper whose content is `content[..content_len]`. `citations`
/// holds `citation_count` paper ids. Writes the paper id to `out_id`.
///
/// # Safety
/// Pointers must be valid for the stated lengths; strings NUL-terminated.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pc_post_paper(
    l: *mut PcLedger,
    author: *const c_char,
    title: *const c_char,
    content: *const u8,
    content_len: usize,
    citations: *const *const c_char,
    citation_count: usize,
    out_id: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let ledger = ledger(l)?;
        let author = Address::new(text(author, "author")?);
        let title = text(title, "title")?;
        let content = ContentAddress::of(bytes(content, content_len, "content")?);
        let mut cites = Vec::with_capacity(citation_count);
        if citation_count > 0 {
            if citations.is_null() {
                return Err(null("citations"));
            }
            for &c in std::slice::from_raw_parts(citations, citation_count) {
                cites.push(PaperId::new(text(c, "citation")?));
            }
        }
        let paper = ledger.post_paper(&author, title, &[], &content, &cites)?;
        write_string(out_id, paper.id.as_str())
    })
}

/// Submits a review with score `z` and comment bytes; writes the review id.
///
/// # Safety
/// Pointers must be valid for the stated lengths; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pc_submit_review(
    l: *mut PcLedger,
    reviewer: *const c_char,
    paper: *const c_char,
    z: f64,
    comment: *const u8,
    comment_len: usize,
    out_id: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let ledger = ledger(l)?;
        let reviewer = Address::new(text(reviewer, "reviewer")?);
        let paper = PaperId::new(text(paper, "paper")?);
        let comment = ContentAddress::of(bytes(comment, comment_len, "comment")?);
        let review = ledger.submit_review(&reviewer, &paper, z, &comment)?;
        write_string(out_id, review.id.as_str())
    })
}

/// Records a reader's score of a review.
///
/// # Safety
/// `l` must be a live handle; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pc_submit_reader_score(
    l: *mut PcLedger,
    reader: *const c_char,
    review: *const c_char,
    value: f64,
) -> PcStatus {
    guard(|| {
        let ledger = ledger(l)?;
        let reader = Address::new(text(reader, "reader")?);
        let review = ReviewId::new(text(review, "review")?);
        ledger.submit_reader_score(&reader, &review, value)?;
        Ok(())
    })
}

/// Seals pending transactions; writes the new block height.
///
/// # Safety
/// `l` must be a live handle; `miner` NUL-terminated; `out_height` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_seal_block(
    l: *mut PcLedger,
    miner: *const c_char,
    out_height: *mut u64,
) -> PcStatus {
    guard(|| {
        let ledger = ledger(l)?;
        let miner = Address::new(text(miner, "miner")?);
        let height = ledger.seal_block(&miner)?.height;
        write(out_height, height, "out_height")
    })
}

/// Sealed balance of `address` in subunits.
///
/// # Safety
/// `l` must be a live handle; `address` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_balance(
    l: *mut PcLedger,
    address: *const c_char,
    out: *mut u64,
) -> PcStatus {
    guard(|| {
        let ledger = ledger(l)?;
        let addr = Address::new(text(address, "address")?);
        let acct = ledger
            .account(&addr)
            .ok_or_else(|| Failure(PcStatus::NotFound, format!("unknown account {addr}")))?;
        write(out, subunits(acct.balance)?, "out")
    })
}

/// Reviewer bonus pool balance in subunits.
///
/// # Safety
/// `l` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_pool_balance(l: *mut PcLedger, out: *mut u64) -> PcStatus {
    guard(|| {
        let balance = ledger(l)?.pool().balance;
        write(out, subunits(balance)?, "out")
    })
}

/// Current review score of a paper.
///
/// # Safety
/// `l` must be a live handle; `paper` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_paper_score(
    l: *mut PcLedger,
    paper: *const c_char,
    out: *mut f64,
) -> PcStatus {
    guard(|| {
        let ledger = ledger(l)?;
        let id = PaperId::new(text(paper, "paper")?);
        let paper = ledger
            .paper(&id)
            .ok_or_else(|| Failure(PcStatus::NotFound, format!("unknown paper {id}")))?;
        write(out, paper.score, "out")
    })
}

/// Writes whether balances, pool and burned tokens add up to everything minted.
///
/// # Safety
/// `l` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_conservation_holds(l: *mut PcLedger, out: *mut bool) -> PcStatus {
    guard(|| {
        let holds = ledger(l)?.conservation_holds();
        write(out, holds, "out")
    })
}

/// Hex SHA-256 of the full ledger state.
///
/// # Safety
/// `l` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_state_digest(l: *mut PcLedger, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let digest = ledger(l)?.state_digest();
        write_string(out, &digest)
    })
}

/// Mean of `values[..len]` after dropping `floor(trim · len)` from each end.
///
/// # Safety
/// `values` must point to `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_trimmed_mean(
    values: *const f64,
    len: usize,
    trim: f64,
    out: *mut f64,
) -> PcStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let v = std::slice::from_raw_parts(values, len);
        let mean = scoring::trimmed_mean(v, trim)
            .map_err(|e| Failure(PcStatus::InvalidArgument, e.to_string()))?;
        write(out, mean, "out")
    })
}

/// Runs a sweep from spec text and writes the CSV.
///
/// # Safety
/// `spec` must be NUL-terminated; `out_csv` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_sweep_csv(spec: *const c_char, out_csv: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let config = |e: pubchain::ConfigError| Failure(PcStatus::Config, e.to_string());
        let spec = SweepSpec::from_kv_str(text(spec, "spec")?).map_err(config)?;
        let rows = run_sweep(&spec).map_err(config)?;
        write_string(out_csv, &sweep_csv(&rows))
    })
}
