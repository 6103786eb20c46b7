use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pubchain::harness::{self, economy, sweep};
use pubchain::store::{DirStore, MemStore};
use pubchain::EconomicParams;

#[derive(Parser)]
#[command(
    name = "pubchain",
    version,
    about = "Blockchain publishing economy simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an adversarial parameter sweep and write CSV.
    Sweep {
        /// Sweep specification (flat key = value file).
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the root seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the replication count.
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Replay a scripted economy and write the settlement CSV.
    Economy {
        scenario: PathBuf,
        /// Mechanism constants (flat key = value file).
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write final balances here.
        #[arg(long)]
        balances: Option<PathBuf>,
        /// Keep paper and comment blobs in this directory.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Run the randomized invariant checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Invariant(String),
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sweep {
            spec,
            out,
            seed,
            replications,
        } => {
            let text = read(&spec)?;
            let mut parsed = sweep::SweepSpec::from_kv_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
            if let Some(seed) = seed {
                parsed.seed = seed;
            }
            if let Some(n) = replications {
                parsed.replications = n;
            }
            let rows = sweep::run_sweep(&parsed).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(out.as_deref(), &sweep::sweep_csv(&rows))
        }
        Command::Economy {
            scenario,
            params,
            out,
            balances,
            store,
        } => {
            let text = read(&scenario)?;
            let params = match params {
                Some(path) => EconomicParams::from_kv_str(&read(&path)?)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
                None => EconomicParams::default(),
            };
            let result = match store {
                Some(dir) => {
                    let store = DirStore::open(&dir)
                        .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
                    economy::run_economy(&text, params, &store)
                }
                None => economy::run_economy(&text, params, &MemStore::default()),
            };
            let report = result.map_err(|e| match e {
                economy::ScenarioError::Conservation { .. } => Failure::Invariant(e.to_string()),
                e => Failure::Usage(format!("{}: {e}", scenario.display())),
            })?;
            emit(out.as_deref(), &report.settlement_csv())?;
            if let Some(path) = balances {
                emit(Some(&path), &report.balances_csv())?;
            }
            Ok(())
        }
        Command::Selftest { seed } => {
            let results = harness::selftest(seed);
            let mut failed = 0;
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.passed { "ok  " } else { "FAIL" },
                    r.name,
                    r.detail
                );
                failed += usize::from(!r.passed);
            }
            if failed > 0 {
                return Err(Failure::Invariant(format!(
                    "{failed} invariant checks failed"
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(2)
        }
    }
}
