//! Mechanism constants and the flat key-value config format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{Amount, AmountError, Ratio};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

impl ConfigError {
    pub(crate) fn bad(key: &str, reason: impl fmt::Display) -> Self {
        ConfigError::BadValue {
            key: key.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Financial-model phase. Phase I is the consortium chain with registration
/// grants; Phase II is the public chain with a per-block coinbase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Consortium,
    Public,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Consortium => "consortium",
            Phase::Public => "public",
        })
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "i" | "consortium" => Ok(Phase::Consortium),
            "2" | "ii" | "public" => Ok(Phase::Public),
            other => Err(format!("unknown phase `{other}`")),
        }
    }
}

/// Every constant of the incentive and scoring mechanisms.
///
/// Config keys: `x`, `a1`, `a2`, `y`, `b1`, `b2`, `lambda`, `m`, `alpha`,
/// `beta`, `n_rs`, `n_rc`, `phase`, `registration_grant`, `trim_fraction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    /// X: fee paid by an author per posted paper.
    pub post_fee: Amount,
    /// a₁: share of X sent to the reviewer bonus pool.
    pub fee_pool_share: Ratio,
    /// a₂: share of X split among cited papers' authors.
    pub fee_citation_share: Ratio,
    /// Y: tokens minted per public-phase block.
    pub block_mint: Amount,
    /// b₁: share of Y sent to the bonus pool.
    pub mint_pool_share: Ratio,
    /// b₂: share of Y distributed to authors.
    pub mint_author_share: Ratio,
    /// λ: quality threshold shared by papers and reviews.
    pub quality_threshold: f64,
    /// M: reward window in blocks.
    pub reward_window: u64,
    /// α: fraction of the pool released per block.
    pub pool_release: Ratio,
    /// β: fraction of each review reward paid to the recording miner.
    pub miner_review_share: Ratio,
    /// N_rs: reader scores needed before a review's effective score counts.
    pub min_reader_scores: usize,
    /// N_rc: reviews of one paper a single reader may score.
    pub max_scores_per_paper: usize,
    pub phase: Phase,
    /// Tokens minted to each newly registered account in the consortium phase.
    pub registration_grant: Amount,
    /// Fraction of reader scores trimmed from each end.
    pub trim_fraction: f64,
}

impl Default for EconomicParams {
    fn default() -> Self {
        let r = |ppb| Ratio::from_parts_per_billion(ppb).expect("static ratio");
        EconomicParams {
            post_fee: Amount::from_tokens(10),
            fee_pool_share: r(200_000_000),
            fee_citation_share: r(300_000_000),
            block_mint: Amount::from_tokens(100),
            mint_pool_share: r(200_000_000),
            mint_author_share: r(400_000_000),
            quality_threshold: 50.0,
            reward_window: 10,
            pool_release: r(500_000_000),
            miner_review_share: r(10_000_000),
            min_reader_scores: 10,
            max_scores_per_paper: 4,
            phase: Phase::Consortium,
            registration_grant: Amount::from_tokens(50),
            trim_fraction: 0.1,
        }
    }
}

impl EconomicParams {
    /// Checks the fraction and range constraints of the mechanism.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let open_unit = |name: &str, r: Ratio| {
            if r.is_zero() || r == Ratio::ONE {
                Err(ConfigError::Invalid(format!(
                    "{name} must lie in (0, 1), got {r}"
                )))
            } else {
                Ok(())
            }
        };
        open_unit("a1", self.fee_pool_share)?;
        open_unit("a2", self.fee_citation_share)?;
        open_unit("b1", self.mint_pool_share)?;
        open_unit("b2", self.mint_author_share)?;
        open_unit("alpha", self.pool_release)?;
        if self
            .fee_pool_share
            .checked_add(self.fee_citation_share)
            .is_none_or(|s| s == Ratio::ONE)
        {
            return Err(ConfigError::Invalid("a1 + a2 must be < 1".into()));
        }
        if self
            .mint_pool_share
            .checked_add(self.mint_author_share)
            .is_none_or(|s| s == Ratio::ONE)
        {
            return Err(ConfigError::Invalid("b1 + b2 must be < 1".into()));
        }
        if self.miner_review_share == Ratio::ONE {
            return Err(ConfigError::Invalid("beta must be < 1".into()));
        }
        if self.reward_window == 0 {
            return Err(ConfigError::Invalid("m must be >= 1".into()));
        }
        if !(0.0..=100.0).contains(&self.quality_threshold) {
            return Err(ConfigError::Invalid("lambda must lie in [0, 100]".into()));
        }
        if !(0.0..0.5).contains(&self.trim_fraction) {
            return Err(ConfigError::Invalid(
                "trim_fraction must lie in [0, 0.5)".into(),
            ));
        }
        Ok(())
    }

    /// Default parameters overridden by the keys present in `text`.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let table = kv::parse(text)?;
        let mut p = EconomicParams::default();
        for (key, value) in &table {
            p.set(key, value)?;
        }
        p.validate()?;
        Ok(p)
    }

    /// Sets one field from its config key. Returns `UnknownKey` for keys that
    /// are not economic parameters.
    pub fn set(&mut self, key: &str, value: &toml::Value) -> Result<(), ConfigError> {
        match key {
            "x" => self.post_fee = kv::amount(key, value)?,
            "a1" => self.fee_pool_share = kv::ratio(key, value)?,
            "a2" => self.fee_citation_share = kv::ratio(key, value)?,
            "y" => self.block_mint = kv::amount(key, value)?,
            "b1" => self.mint_pool_share = kv::ratio(key, value)?,
            "b2" => self.mint_author_share = kv::ratio(key, value)?,
            "lambda" => self.quality_threshold = kv::float(key, value)?,
            "m" => self.reward_window = kv::count(key, value)? as u64,
            "alpha" => self.pool_release = kv::ratio(key, value)?,
            "beta" => self.miner_review_share = kv::ratio(key, value)?,
            "n_rs" => self.min_reader_scores = kv::count(key, value)?,
            "n_rc" => self.max_scores_per_paper = kv::count(key, value)?,
            "phase" => {
                self.phase = kv::string(key, value)?
                    .parse()
                    .map_err(|e| ConfigError::bad(key, e))?
            }
            "registration_grant" => self.registration_grant = kv::amount(key, value)?,
            "trim_fraction" => self.trim_fraction = kv::float(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }
}

/// Helpers for the flat key-value (TOML subset) config files.
pub(crate) mod kv {
    use super::*;

    pub fn parse(text: &str) -> Result<toml::Table, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table()) {
            return Err(ConfigError::bad(k, "nested tables are not supported"));
        }
        Ok(table)
    }

    fn decimal_text(key: &str, value: &toml::Value) -> Result<String, ConfigError> {
        match value {
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            toml::Value::String(s) => Ok(s.clone()),
            _ => Err(ConfigError::bad(key, "expected a number")),
        }
    }

    pub fn amount(key: &str, value: &toml::Value) -> Result<Amount, ConfigError> {
        decimal_text(key, value)?
            .parse()
            .map_err(|e: AmountError| ConfigError::bad(key, e))
    }

    pub fn ratio(key: &str, value: &toml::Value) -> Result<Ratio, ConfigError> {
        decimal_text(key, value)?
            .parse()
            .map_err(|e: AmountError| ConfigError::bad(key, e))
    }

    pub fn float(key: &str, value: &toml::Value) -> Result<f64, ConfigError> {
        match value {
            toml::Value::Integer(i) => Ok(*i as f64),
            toml::Value::Float(f) => Ok(*f),
            _ => Err(ConfigError::bad(key, "expected a number")),
        }
    }

    pub fn count(key: &str, value: &toml::Value) -> Result<usize, ConfigError> {
        match value {
            toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            _ => Err(ConfigError::bad(key, "expected a non-negative integer")),
        }
    }

    pub fn string(key: &str, value: &toml::Value) -> Result<String, ConfigError> {
        match value {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            _ => Err(ConfigError::bad(key, "expected a string")),
        }
    }

    /// A scalar or an array of scalars, flattened to a list.
    pub fn list<T>(
        key: &str,
        value: &toml::Value,
        item: impl Fn(&str, &toml::Value) -> Result<T, ConfigError>,
    ) -> Result<Vec<T>, ConfigError> {
        match value {
            toml::Value::Array(items) => items.iter().map(|v| item(key, v)).collect(),
            scalar => Ok(vec![item(key, scalar)?]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        EconomicParams::default().validate().unwrap();
    }

    #[test]
    fn parses_overrides() {
        let p = EconomicParams::from_kv_str(
            "x = 12.5\na1 = 0.1\nphase = \"public\"\nm = 3\nlambda = 60\n",
        )
        .unwrap();
        assert_eq!(p.post_fee, "12.5".parse().unwrap());
        assert_eq!(p.fee_pool_share.to_string(), "0.1");
        assert_eq!(p.phase, Phase::Public);
        assert_eq!(p.reward_window, 3);
        assert_eq!(p.quality_threshold, 60.0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_fractions() {
        assert!(matches!(
            EconomicParams::from_kv_str("gamma = 1"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            EconomicParams::from_kv_str("a1 = 0.6\na2 = 0.4"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(EconomicParams::from_kv_str("alpha = 1").is_err());
        assert!(EconomicParams::from_kv_str("m = 0").is_err());
        assert!(EconomicParams::from_kv_str("x = [").is_err());
    }
}
