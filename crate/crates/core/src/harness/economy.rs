//! Scripted multi-block economy runs.
//!
//! A scenario is a line-oriented script. Blank lines and `#` comments are
//! ignored; double quotes group words into one argument.
//!
//! ```text
//! set KEY VALUE                     # economic parameter, before any action
//! register NAME [IDENTITY]
//! phase public
//! post AUTHOR LABEL TITLE [cites LABEL...]
//! review REVIEWER PAPER Z [as LABEL]   # default label PAPER/REVIEWER
//! score READER REVIEW VALUE
//! seal MINER [COUNT]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::amount::{format_signed, Amount};
use crate::ledger::{Address, Ledger, LedgerError, PaperId, ReviewId};
use crate::params::{ConfigError, EconomicParams};
use crate::store::{BlobStore, StoreError};
use crate::tokenomics::Payee;

pub const SETTLEMENT_CSV_HEADER: &str = "block,account,reason,amount";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Rejected { line: usize, source: LedgerError },
    #[error("line {line}: {source}")]
    Store { line: usize, source: StoreError },
    #[error("line {line}: {source}")]
    Config { line: usize, source: ConfigError },
    #[error("conservation violated after block {height}")]
    Conservation { height: u64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Action {
    Set(String, String),
    Register {
        name: String,
        identity: Option<String>,
    },
    PublicPhase,
    Post {
        author: String,
        label: String,
        title: String,
        cites: Vec<String>,
    },
    Review {
        reviewer: String,
        paper: String,
        z: f64,
        label: Option<String>,
    },
    Score {
        reader: String,
        review: String,
        value: f64,
    },
    Seal {
        miner: String,
        count: u64,
    },
}

fn tokenize(line: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    let mut has_token = false;
    for c in line.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                has_token = true;
            }
            c if c.is_whitespace() && !in_quotes => {
                if has_token {
                    out.push(std::mem::take(&mut cur));
                    has_token = false;
                }
            }
            c => {
                cur.push(c);
                has_token = true;
            }
        }
    }
    if in_quotes {
        return Err("unterminated quote".into());
    }
    if has_token {
        out.push(cur);
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_action(tokens: &[String]) -> Result<Action, String> {
    let arg = |i: usize, what: &str| {
        tokens
            .get(i)
            .cloned()
            .ok_or_else(|| format!("`{}` needs {what}", tokens[0]))
    };
    let number = |s: String, what: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("{what} `{s}` is not a number"))
    };
    let max_args = |n: usize| {
        if tokens.len() > n {
            Err(format!("too many arguments to `{}`", tokens[0]))
        } else {
            Ok(())
        }
    };
    match tokens[0].as_str() {
        "set" => {
            max_args(3)?;
            Ok(Action::Set(arg(1, "a key")?, arg(2, "a value")?))
        }
        "register" => {
            max_args(3)?;
            Ok(Action::Register {
                name: arg(1, "a name")?,
                identity: tokens.get(2).cloned(),
            })
        }
        "phase" => {
            max_args(2)?;
            match arg(1, "a phase")?.as_str() {
                "public" | "2" | "ii" => Ok(Action::PublicPhase),
                other => Err(format!("cannot switch to phase `{other}`")),
            }
        }
        "post" => {
            let cites = match tokens.get(4).map(String::as_str) {
                None => Vec::new(),
                Some("cites") => tokens[5..].to_vec(),
                Some(other) => return Err(format!("expected `cites`, found `{other}`")),
            };
            Ok(Action::Post {
                author: arg(1, "an author")?,
                label: arg(2, "a paper label")?,
                title: arg(3, "a title")?,
                cites,
            })
        }
        "review" => {
            let label = match (tokens.get(4).map(String::as_str), tokens.get(5)) {
                (None, _) => None,
                (Some("as"), Some(l)) if tokens.len() == 6 => Some(l.clone()),
                _ => return Err("expected `as LABEL` after the score".into()),
            };
            Ok(Action::Review {
                reviewer: arg(1, "a reviewer")?,
                paper: arg(2, "a paper label")?,
                z: number(arg(3, "a score")?, "score")?,
                label,
            })
        }
        "score" => {
            max_args(4)?;
            Ok(Action::Score {
                reader: arg(1, "a reader")?,
                review: arg(2, "a review label")?,
                value: number(arg(3, "a value")?, "value")?,
            })
        }
        "seal" => {
            max_args(3)?;
            let count = match tokens.get(2) {
                None => 1,
                Some(c) => c
                    .parse()
                    .map_err(|_| format!("block count `{c}` is not an integer"))?,
            };
            Ok(Action::Seal {
                miner: arg(1, "a miner")?,
                count,
            })
        }
        other => Err(format!("unknown action `{other}`")),
    }
}

fn parse_scenario(text: &str) -> Result<Vec<(usize, Action)>, ScenarioError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens = tokenize(strip_comment(raw))
            .map_err(|message| ScenarioError::Parse { line, message })?;
        if tokens.is_empty() {
            continue;
        }
        let action =
            parse_action(&tokens).map_err(|message| ScenarioError::Parse { line, message })?;
        out.push((line, action));
    }
    Ok(out)
}

/// Outcome of a scenario run.
#[derive(Debug, Clone)]
pub struct EconomyReport {
    pub ledger: Ledger,
    /// Scenario name of each address.
    pub names: BTreeMap<Address, String>,
}

impl EconomyReport {
    pub fn address(&self, name: &str) -> Option<&Address> {
        self.names.iter().find(|(_, n)| *n == name).map(|(a, _)| a)
    }

    pub fn balance_of(&self, name: &str) -> Amount {
        self.address(name)
            .map(|a| self.ledger.balance(a))
            .unwrap_or_default()
    }

    fn label(&self, payee: &Payee) -> String {
        match payee {
            Payee::Account(a) => self.names.get(a).cloned().unwrap_or_else(|| a.to_string()),
            other => other.to_string(),
        }
    }

    pub fn settlement_csv(&self) -> String {
        let mut out = String::from(SETTLEMENT_CSV_HEADER);
        out.push('\n');
        for block in self.ledger.blocks() {
            for e in &block.settlement {
                writeln!(
                    out,
                    "{},{},{},{}",
                    block.height,
                    self.label(&e.payee),
                    e.reason,
                    format_signed(e.amount)
                )
                .expect("write to string");
            }
        }
        out
    }

    /// `account,address,balance` for every account, then the pool and burn totals.
    pub fn balances_csv(&self) -> String {
        let mut out = String::from("account,address,balance\n");
        for acct in self.ledger.accounts() {
            let name = self.names.get(&acct.address).cloned().unwrap_or_default();
            writeln!(out, "{name},{},{}", acct.address, acct.balance).expect("write to string");
        }
        writeln!(out, "pool,,{}", self.ledger.pool().balance).expect("write to string");
        writeln!(out, "burn,,{}", self.ledger.burned()).expect("write to string");
        out
    }
}

/// Replays a scenario script against a fresh ledger, storing paper and
/// comment blobs in `store`. Conservation is checked after every block.
pub fn run_economy(
    text: &str,
    mut params: EconomicParams,
    store: &dyn BlobStore,
) -> Result<EconomyReport, ScenarioError> {
    let actions = parse_scenario(text)?;
    let mut iter = actions.into_iter().peekable();
    while let Some((line, Action::Set(key, value))) = iter.peek().cloned() {
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.clone()));
        params
            .set(&key, &parsed)
            .map_err(|source| ScenarioError::Config { line, source })?;
        iter.next();
    }
    params
        .validate()
        .map_err(|source| ScenarioError::Config { line: 0, source })?;

    let mut ledger = Ledger::new(params);
    let mut names: BTreeMap<String, Address> = BTreeMap::new();
    let mut papers: BTreeMap<String, PaperId> = BTreeMap::new();
    let mut reviews: BTreeMap<String, ReviewId> = BTreeMap::new();

    for (line, action) in iter {
        let parse_err = |message: String| ScenarioError::Parse { line, message };
        let rejected = |source| ScenarioError::Rejected { line, source };
        let store_err = |source| ScenarioError::Store { line, source };
        let who = |name: &str| {
            names
                .get(name)
                .cloned()
                .ok_or_else(|| parse_err(format!("unknown participant `{name}`")))
        };
        match action {
            Action::Set(..) => {
                return Err(parse_err("`set` must precede all other actions".into()))
            }
            Action::Register { name, identity } => {
                if names.contains_key(&name) {
                    return Err(parse_err(format!(
                        "participant `{name}` already registered"
                    )));
                }
                let identity = identity.unwrap_or_else(|| format!("{name}@pubchain.test"));
                let acct = ledger.register_account(&identity).map_err(rejected)?;
                names.insert(name, acct.address);
            }
            Action::PublicPhase => ledger.enter_public_phase(),
            Action::Post {
                author,
                label,
                title,
                cites,
            } => {
                let author = who(&author)?;
                if papers.contains_key(&label) {
                    return Err(parse_err(format!("paper label `{label}` already used")));
                }
                let content = store
                    .put(format!("paper {label}: {title}").as_bytes())
                    .map_err(store_err)?;
                let citations = cites
                    .iter()
                    .map(|c| {
                        papers
                            .get(c)
                            .cloned()
                            .ok_or_else(|| parse_err(format!("unknown paper label `{c}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let paper = ledger
                    .post_paper(&author, &title, &[], &content, &citations)
                    .map_err(rejected)?;
                papers.insert(label, paper.id);
            }
            Action::Review {
                reviewer,
                paper,
                z,
                label,
            } => {
                let label = label.unwrap_or_else(|| format!("{paper}/{reviewer}"));
                if reviews.contains_key(&label) {
                    return Err(parse_err(format!("review label `{label}` already used")));
                }
                let reviewer_addr = who(&reviewer)?;
                let paper_id = papers
                    .get(&paper)
                    .cloned()
                    .ok_or_else(|| parse_err(format!("unknown paper label `{paper}`")))?;
                let comment = store
                    .put(format!("comment {label} by {reviewer}").as_bytes())
                    .map_err(store_err)?;
                let review = ledger
                    .submit_review(&reviewer_addr, &paper_id, z, &comment)
                    .map_err(rejected)?;
                reviews.insert(label, review.id);
            }
            Action::Score {
                reader,
                review,
                value,
            } => {
                let reader = who(&reader)?;
                let review_id = reviews
                    .get(&review)
                    .cloned()
                    .ok_or_else(|| parse_err(format!("unknown review label `{review}`")))?;
                ledger
                    .submit_reader_score(&reader, &review_id, value)
                    .map_err(rejected)?;
            }
            Action::Seal { miner, count } => {
                let miner = who(&miner)?;
                for _ in 0..count {
                    let height = ledger.seal_block(&miner).map_err(rejected)?.height;
                    if !ledger.conservation_holds() {
                        return Err(ScenarioError::Conservation { height });
                    }
                }
            }
        }
    }
    Ok(EconomyReport {
        ledger,
        names: names.into_iter().map(|(n, a)| (a, n)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::MemStore;

    fn run(text: &str) -> Result<EconomyReport, ScenarioError> {
        run_economy(text, EconomicParams::default(), &MemStore::new())
    }

    #[test]
    fn tokenizer_handles_quotes_and_comments() {
        assert_eq!(
            tokenize(strip_comment(
                r#"post alice p1 "A Title # not comment" # comment"#
            ))
            .unwrap(),
            vec!["post", "alice", "p1", "A Title # not comment"]
        );
        assert!(tokenize("\"open").is_err());
        assert_eq!(tokenize("a \"\" b").unwrap(), vec!["a", "", "b"]);
    }

    #[test]
    fn empty_consortium_run_keeps_grants() {
        let r = run("register alice\nregister bob\nseal alice 5\n").unwrap();
        assert_eq!(r.ledger.blocks().len(), 5);
        assert_eq!(r.balance_of("alice"), Amount::from_tokens(50));
        assert_eq!(r.balance_of("bob"), Amount::from_tokens(50));
        assert_eq!(r.settlement_csv(), format!("{SETTLEMENT_CSV_HEADER}\n"));
    }

    #[test]
    fn citation_credits_a2x() {
        let r = run("register a\nregister b\nregister m\n\
             post a A \"Paper A\"\nseal m\n\
             post b B \"Paper B\" cites A\nseal m\n")
        .unwrap();
        assert_eq!(r.balance_of("a"), Amount::from_tokens(50 - 10 + 3));
        assert!(r.settlement_csv().contains("1,a,citation,3.00000000"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match run("register a\n\nfrobnicate\n") {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match run("register a\npost a p \"t\"\npost a q \"t2\"\npost a r \"t3\"\npost a s \"t4\"\npost a u \"t5\"\npost a v \"t6\"\n") {
            Err(ScenarioError::Rejected { line, source: LedgerError::InsufficientBalance { .. } }) => {
                assert_eq!(line, 7)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            run("seal ghost"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            run("register a\nset x 5"),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            run("set gamma 1"),
            Err(ScenarioError::Config { line: 1, .. })
        ));
    }

    #[test]
    fn set_overrides_params() {
        let r = run("set x 20\nset phase public\nregister a\nseal a\n").unwrap();
        assert_eq!(r.ledger.params().post_fee, Amount::from_tokens(20));
        assert_eq!(r.ledger.blocks()[0].minted, Amount::from_tokens(100));
    }
}
