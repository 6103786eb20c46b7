use std::ffi::{c_char, CStr, CString};
use std::ptr;

use pubchain_ffi::*;

struct Handle(*mut PcLedger);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { pc_ledger_free(self.0) }
    }
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { pc_string_free(s) };
    out
}

fn last_error() -> String {
    let p = pc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn ledger(params: Option<&str>) -> Handle {
    let params = params.map(c);
    let mut l = ptr::null_mut();
    let status =
        unsafe { pc_ledger_new(params.as_ref().map_or(ptr::null(), |p| p.as_ptr()), &mut l) };
    assert_eq!(status, PcStatus::Ok);
    Handle(l)
}

fn register(l: &Handle, identity: &str) -> CString {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { pc_register(l.0, c(identity).as_ptr(), &mut out) },
        PcStatus::Ok
    );
    c(&take(out))
}

fn balance(l: &Handle, addr: &CString) -> u64 {
    let mut out = 0;
    assert_eq!(
        unsafe { pc_balance(l.0, addr.as_ptr(), &mut out) },
        PcStatus::Ok
    );
    out
}

#[test]
fn full_round_through_the_abi() {
    let l = ledger(None);
    let author = register(&l, "author@x");
    let reviewer = register(&l, "reviewer@x");
    let miner = register(&l, "miner@x");
    assert_eq!(balance(&l, &author), 50 * 100_000_000);

    let content = b"the paper";
    let mut paper = ptr::null_mut();
    let status = unsafe {
        pc_post_paper(
            l.0,
            author.as_ptr(),
            c("Title").as_ptr(),
            content.as_ptr(),
            content.len(),
            ptr::null(),
            0,
            &mut paper,
        )
    };
    assert_eq!(status, PcStatus::Ok);
    let paper = c(&take(paper));

    let mut review = ptr::null_mut();
    let comment = b"looks right";
    let status = unsafe {
        pc_submit_review(
            l.0,
            reviewer.as_ptr(),
            paper.as_ptr(),
            75.0,
            comment.as_ptr(),
            comment.len(),
            &mut review,
        )
    };
    assert_eq!(status, PcStatus::Ok);
    let review = c(&take(review));

    let status = unsafe { pc_submit_reader_score(l.0, reviewer.as_ptr(), review.as_ptr(), 80.0) };
    assert_eq!(status, PcStatus::Rejected);
    assert!(last_error().contains("conflict"));

    let mut height = u64::MAX;
    assert_eq!(
        unsafe { pc_seal_block(l.0, miner.as_ptr(), &mut height) },
        PcStatus::Ok
    );
    assert_eq!(height, 0);
    assert_eq!(balance(&l, &author), 40 * 100_000_000);
    assert_eq!(balance(&l, &miner), 58 * 100_000_000);

    let mut pool = 0;
    assert_eq!(unsafe { pc_pool_balance(l.0, &mut pool) }, PcStatus::Ok);
    assert_eq!(pool, 2 * 100_000_000);

    let mut score = -1.0;
    assert_eq!(
        unsafe { pc_paper_score(l.0, paper.as_ptr(), &mut score) },
        PcStatus::Ok
    );
    assert_eq!(score, 0.0);

    let mut holds = false;
    assert_eq!(
        unsafe { pc_conservation_holds(l.0, &mut holds) },
        PcStatus::Ok
    );
    assert!(holds);

    let mut digest = ptr::null_mut();
    assert_eq!(unsafe { pc_state_digest(l.0, &mut digest) }, PcStatus::Ok);
    assert_eq!(take(digest).len(), 64);
}

#[test]
fn errors_map_to_status_codes() {
    let l = ledger(Some("x = 60\nregistration_grant = 50\n"));
    let a = register(&l, "a@x");
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { pc_register(l.0, c("a@x").as_ptr(), &mut out) },
        PcStatus::Rejected
    );

    let status = unsafe {
        pc_post_paper(
            l.0,
            a.as_ptr(),
            c("t").as_ptr(),
            b"c".as_ptr(),
            1,
            ptr::null(),
            0,
            &mut out,
        )
    };
    assert_eq!(status, PcStatus::InsufficientBalance);

    let mut h = 0;
    assert_eq!(
        unsafe { pc_seal_block(l.0, c("ghost").as_ptr(), &mut h) },
        PcStatus::NotFound
    );
    assert_eq!(
        unsafe { pc_seal_block(ptr::null_mut(), a.as_ptr(), &mut h) },
        PcStatus::NullPointer
    );
    assert_eq!(
        unsafe { pc_seal_block(l.0, a.as_ptr(), ptr::null_mut()) },
        PcStatus::NullPointer
    );

    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { pc_register(l.0, bad.as_ptr() as *const c_char, &mut out) },
        PcStatus::InvalidArgument
    );

    let mut raw = ptr::null_mut();
    assert_eq!(
        unsafe { pc_ledger_new(c("bogus = 1").as_ptr(), &mut raw) },
        PcStatus::Config
    );
    assert!(last_error().contains("bogus"));
    assert!(raw.is_null());
}

#[test]
fn success_clears_last_error() {
    let l = ledger(None);
    let mut h = 0;
    assert_eq!(
        unsafe { pc_seal_block(l.0, c("ghost").as_ptr(), &mut h) },
        PcStatus::NotFound
    );
    assert!(!pc_last_error().is_null());
    register(&l, "someone@x");
    assert!(pc_last_error().is_null());
}

#[test]
fn trimmed_mean_and_sweep() {
    let v: Vec<f64> = (1..=10).map(f64::from).collect();
    let mut m = 0.0;
    assert_eq!(
        unsafe { pc_trimmed_mean(v.as_ptr(), v.len(), 0.1, &mut m) },
        PcStatus::Ok
    );
    assert_eq!(m, 5.5);
    assert_eq!(
        unsafe { pc_trimmed_mean(v.as_ptr(), 0, 0.1, &mut m) },
        PcStatus::InvalidArgument
    );

    let spec = c("strategy = 1\nn_mn = [0, 1000]\nsigma_s2 = 0\nreplications = 2\n");
    let mut csv = ptr::null_mut();
    assert_eq!(
        unsafe { pc_sweep_csv(spec.as_ptr(), &mut csv) },
        PcStatus::Ok
    );
    let csv = take(csv);
    assert_eq!(
        csv.lines().nth(1),
        Some("1,0,10,,2,40.000000,0.000000,40.000000")
    );
    assert_eq!(
        csv.lines().nth(2),
        Some("1,1000,10,,2,80.000000,0.000000,80.000000")
    );
    unsafe { pc_string_free(ptr::null_mut()) };
}
