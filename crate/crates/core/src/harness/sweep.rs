//! Parameter sweeps over the number of malicious nodes.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::adversary::{self, AdversaryConfig, Strategy};
use crate::params::{kv, ConfigError};

pub const DEFAULT_REPLICATIONS: usize = 20;

pub const SWEEP_CSV_HEADER: &str =
    "strategy,n_mn,n_rs,delta,seed_count,mean_s,std_s,benchmark_mean_s";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub strategy: Strategy,
    /// Swept N_mn values, strictly increasing.
    pub malicious_nodes: Vec<usize>,
    /// N_rs values; one curve each.
    pub honest_readers: Vec<usize>,
    /// δ values; one curve each under strategy 2, ignored under strategy 1.
    pub fake_reviewer_fractions: Vec<f64>,
    /// Fixed fields of every generated scenario.
    pub base: AdversaryConfig,
    pub replications: usize,
    /// Root seed; replication `k` uses [`replication_seed`]`(seed, k)`.
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let base = AdversaryConfig::default();
        SweepSpec {
            strategy: Strategy::AllFakeReviewers,
            malicious_nodes: (0..=10).map(|k| k * 100).collect(),
            honest_readers: vec![base.honest_readers],
            fake_reviewer_fractions: vec![base.fake_reviewer_fraction],
            base,
            replications: DEFAULT_REPLICATIONS,
            seed: 0,
        }
    }
}

impl SweepSpec {
    /// Parses the flat key-value spec format.
    ///
    /// Keys: `strategy`, `n_mn`, `n_rs`, `delta` (scalars or arrays),
    /// `replications`, `seed`, plus any [`AdversaryConfig`] key.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let table = kv::parse(text)?;
        let mut spec = SweepSpec::default();
        for (key, value) in &table {
            match key.as_str() {
                "strategy" => {
                    let n = match value {
                        toml::Value::Integer(n) => *n,
                        _ => return Err(ConfigError::bad(key, "expected 1 or 2")),
                    };
                    spec.strategy = Strategy::from_number(n)
                        .ok_or_else(|| ConfigError::bad(key, "expected 1 or 2"))?;
                }
                "n_mn" => spec.malicious_nodes = kv::list(key, value, kv::count)?,
                "n_rs" => spec.honest_readers = kv::list(key, value, kv::count)?,
                "delta" => spec.fake_reviewer_fractions = kv::list(key, value, kv::float)?,
                "replications" => spec.replications = kv::count(key, value)?,
                "seed" => spec.seed = kv::count(key, value)? as u64,
                _ => spec.base.set(key, value)?,
            }
        }
        if let Some(&n_rs) = spec.honest_readers.first() {
            spec.base.honest_readers = n_rs;
        }
        if let Some(&d) = spec.fake_reviewer_fractions.first() {
            spec.base.fake_reviewer_fraction = d;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.replications == 0 {
            return Err(ConfigError::Invalid("replications must be >= 1".into()));
        }
        if self.malicious_nodes.is_empty() {
            return Err(ConfigError::Invalid("n_mn sweep is empty".into()));
        }
        if self.malicious_nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::Invalid(
                "n_mn sweep must be strictly increasing".into(),
            ));
        }
        if self.honest_readers.is_empty() || self.fake_reviewer_fractions.is_empty() {
            return Err(ConfigError::Invalid(
                "n_rs and delta need at least one value".into(),
            ));
        }
        for point in self.points() {
            point.config(self, 0).validate()?;
        }
        Ok(())
    }

    fn deltas(&self) -> Vec<Option<f64>> {
        match self.strategy {
            Strategy::AllFakeReviewers => vec![None],
            Strategy::SplitReviewersReaders => self
                .fake_reviewer_fractions
                .iter()
                .copied()
                .map(Some)
                .collect(),
        }
    }

    /// Sweep points in output order: δ, then N_rs, then N_mn.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for delta in self.deltas() {
            for &n_rs in &self.honest_readers {
                for &n_mn in &self.malicious_nodes {
                    out.push(SweepPoint { n_mn, n_rs, delta });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n_mn: usize,
    pub n_rs: usize,
    pub delta: Option<f64>,
}

impl SweepPoint {
    pub fn config(&self, spec: &SweepSpec, replication: usize) -> AdversaryConfig {
        let mut cfg = spec.base.clone();
        cfg.malicious_nodes = self.n_mn;
        cfg.honest_readers = self.n_rs;
        if let Some(d) = self.delta {
            cfg.fake_reviewer_fraction = d;
        }
        cfg.seed = replication_seed(spec.seed, replication);
        cfg
    }
}

/// SplitMix64 of `root ⊕ k`. Every sweep point shares the same replication
/// seeds, so curves are compared on common random numbers.
pub fn replication_seed(root: u64, replication: usize) -> u64 {
    let mut z = root ^ (replication as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub strategy: Strategy,
    pub n_mn: usize,
    pub n_rs: usize,
    pub delta: Option<f64>,
    pub seed_count: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub benchmark_mean_s: f64,
}

/// Mean and sample standard deviation, summed in input order.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ConfigError> {
    spec.validate()?;
    let points = spec.points();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..spec.replications).map(move |r| (p, r)))
        .collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let cfg = points[p].config(spec, r);
            adversary::run_strategy(spec.strategy, &cfg)
                .map(|scenario| (scenario.paper_score(), scenario.benchmark_score()))
        })
        .collect::<Result<_, _>>()?;

    Ok(points
        .iter()
        .zip(results.chunks(spec.replications))
        .map(|(point, chunk)| {
            let scores: Vec<f64> = chunk.iter().map(|(s, _)| *s).collect();
            let bench: Vec<f64> = chunk.iter().map(|(_, b)| *b).collect();
            let (mean_s, std_s) = mean_std(&scores);
            SweepRow {
                strategy: spec.strategy,
                n_mn: point.n_mn,
                n_rs: point.n_rs,
                delta: point.delta,
                seed_count: spec.replications,
                mean_s,
                std_s,
                benchmark_mean_s: mean_std(&bench).0,
            }
        })
        .collect())
}

/// Writes rows with fixed six-decimal formatting.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let delta = r.delta.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.strategy.number(),
            r.n_mn,
            r.n_rs,
            delta,
            r.seed_count,
            r.mean_s,
            r.std_s,
            r.benchmark_mean_s
        )
        .expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_single_point() {
        let spec = SweepSpec {
            malicious_nodes: vec![0],
            base: AdversaryConfig {
                noise_variance: 0.0,
                ..AdversaryConfig::default()
            },
            replications: 3,
            ..SweepSpec::default()
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!(
            (r.n_mn, r.mean_s, r.std_s, r.benchmark_mean_s),
            (0, 40.0, 0.0, 40.0)
        );
        assert_eq!(
            sweep_csv(&rows),
            format!("{SWEEP_CSV_HEADER}\n1,0,10,,3,40.000000,0.000000,40.000000\n")
        );
    }

    #[test]
    fn parses_figure_spec() {
        let spec = SweepSpec::from_kv_str(
            "strategy = 2\nn_mn = [0, 100, 200]\nn_rs = 10\ndelta = [0.1, 0.2, 0.5]\n\
             v_l = 20\nv_u = 100\nn_rc = 4\nsigma_s2 = 10\nreplications = 5\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(spec.strategy, Strategy::SplitReviewersReaders);
        assert_eq!(spec.points().len(), 9);
        assert_eq!(spec.replications, 5);
        assert_eq!(spec.base.attack_score, 20.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SweepSpec::from_kv_str("n_mn = [100, 0]").is_err());
        assert!(SweepSpec::from_kv_str("n_mn = []").is_err());
        assert!(SweepSpec::from_kv_str("replications = 0").is_err());
        assert!(SweepSpec::from_kv_str("strategy = 3").is_err());
        assert!(SweepSpec::from_kv_str("bogus = 1").is_err());
        assert!(SweepSpec::from_kv_str("n_mn = [2000]").is_ok());
        let spec = SweepSpec::from_kv_str("n_mn = [2000]\nreplications = 1").unwrap();
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn replication_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> =
            (0..100).map(|k| replication_seed(0, k)).collect();
        assert_eq!(seeds.len(), 100);
    }
}
