//! Fixed-point token amounts and fractional ratios.
//!
//! Token balances are counted in subunits of 10⁻⁸ token. Ratios are counted
//! in parts per 10⁹. Every split rounds down; callers route the remainder
//! explicitly so that totals are conserved exactly.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of subunits in one token.
pub const SUBUNITS_PER_TOKEN: u128 = 100_000_000;
const TOKEN_DECIMALS: usize = 8;

/// Denominator of a [`Ratio`].
pub const RATIO_DENOM: u64 = 1_000_000_000;
const RATIO_DECIMALS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountError {
    #[error("invalid decimal amount `{0}`")]
    Parse(String),
    #[error("amount `{0}` has more than {1} fractional digits")]
    TooPrecise(String, usize),
    #[error("ratio `{0}` is outside [0, 1]")]
    RatioRange(String),
}

/// A non-negative token amount in subunits.
///
/// Serialized as a decimal string of subunits; JSON numbers cannot carry a
/// full `u128` through serde's buffered enum path.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[must_use]
pub struct Amount(u128);

impl Serialize for Amount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse::<u128>()
            .map(Amount)
            .map_err(|_| serde::de::Error::custom(format!("bad subunit count {text:?}")))
    }
}

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn from_subunits(subunits: u128) -> Self {
        Amount(subunits)
    }

    pub const fn from_tokens(tokens: u64) -> Self {
        Amount(tokens as u128 * SUBUNITS_PER_TOKEN)
    }

    /// Nearest subunit to a floating token value. Negative and NaN inputs map to zero.
    pub fn from_tokens_f64(tokens: f64) -> Self {
        if tokens.is_nan() || tokens <= 0.0 {
            return Amount::ZERO;
        }
        Amount((tokens * SUBUNITS_PER_TOKEN as f64).round() as u128)
    }

    pub const fn subunits(self) -> u128 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_sub(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_sub(rhs.0).map(Amount)
    }

    pub fn saturating_sub(self, rhs: Amount) -> Amount {
        Amount(self.0.saturating_sub(rhs.0))
    }

    pub fn times(self, n: u128) -> Amount {
        Amount(self.0 * n)
    }

    /// `floor(self / parts)` and the remainder.
    pub fn div_rem(self, parts: u128) -> (Amount, Amount) {
        assert!(parts > 0, "division of an amount into zero parts");
        (Amount(self.0 / parts), Amount(self.0 % parts))
    }

    /// `floor(self · num / den)`.
    pub fn mul_div_floor(self, num: u128, den: u128) -> Amount {
        assert!(den > 0, "zero denominator");
        Amount(mul_div_floor(self.0, num, den))
    }

    pub fn as_tokens_f64(self) -> f64 {
        self.0 as f64 / SUBUNITS_PER_TOKEN as f64
    }

    pub fn to_signed(self) -> i128 {
        i128::try_from(self.0).expect("amount exceeds i128")
    }
}

/// `floor(value · num / den)` without intermediate overflow for values that
/// fit the simulator's ranges; falls back to split multiplication otherwise.
fn mul_div_floor(value: u128, num: u128, den: u128) -> u128 {
    match value.checked_mul(num) {
        Some(p) => p / den,
        None => {
            let (q, r) = (value / den, value % den);
            q * num + r * num / den
        }
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0.checked_add(rhs.0).expect("token amount overflow"))
    }
}

impl AddAssign for Amount {
    fn add_assign(&mut self, rhs: Amount) {
        *self = *self + rhs;
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        self.checked_sub(rhs).expect("token amount underflow")
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Amount> for Amount {
    fn sum<I: Iterator<Item = &'a Amount>>(iter: I) -> Amount {
        iter.copied().sum()
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / SUBUNITS_PER_TOKEN;
        let frac = self.0 % SUBUNITS_PER_TOKEN;
        write!(f, "{whole}.{frac:0width$}", width = TOKEN_DECIMALS)
    }
}

impl FromStr for Amount {
    type Err = AmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_decimal(s, TOKEN_DECIMALS).map(Amount)
    }
}

/// Formats a signed subunit delta with the same precision as [`Amount`].
pub fn format_signed(subunits: i128) -> String {
    let sign = if subunits < 0 { "-" } else { "" };
    format!("{sign}{}", Amount(subunits.unsigned_abs()))
}

/// A fraction in `[0, 1]` stored in parts per 10⁹.
#[derive(
    Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Ratio(u64);

impl Ratio {
    pub const ZERO: Ratio = Ratio(0);
    pub const ONE: Ratio = Ratio(RATIO_DENOM);

    pub fn from_parts_per_billion(ppb: u64) -> Result<Self, AmountError> {
        if ppb > RATIO_DENOM {
            return Err(AmountError::RatioRange(ppb.to_string()));
        }
        Ok(Ratio(ppb))
    }

    pub fn from_f64(value: f64) -> Result<Self, AmountError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(AmountError::RatioRange(value.to_string()));
        }
        Ok(Ratio((value * RATIO_DENOM as f64).round() as u64))
    }

    pub const fn parts_per_billion(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / RATIO_DENOM as f64
    }

    /// `1 − self`.
    pub fn complement(self) -> Ratio {
        Ratio(RATIO_DENOM - self.0)
    }

    /// `floor(self · amount)`.
    pub fn of(self, amount: Amount) -> Amount {
        amount.mul_div_floor(self.0 as u128, RATIO_DENOM as u128)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Sum of two ratios, if it stays within `[0, 1]`.
    pub fn checked_add(self, rhs: Ratio) -> Option<Ratio> {
        let s = self.0 + rhs.0;
        (s <= RATIO_DENOM).then_some(Ratio(s))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / RATIO_DENOM;
        let frac = self.0 % RATIO_DENOM;
        if frac == 0 {
            return write!(f, "{whole}");
        }
        let digits = format!("{frac:0width$}", width = RATIO_DECIMALS);
        write!(f, "{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl FromStr for Ratio {
    type Err = AmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ppb = parse_decimal(s, RATIO_DECIMALS)?;
        let ppb = u64::try_from(ppb).map_err(|_| AmountError::RatioRange(s.to_string()))?;
        Ratio::from_parts_per_billion(ppb).map_err(|_| AmountError::RatioRange(s.to_string()))
    }
}

/// Parses a non-negative decimal string into an integer scaled by `10^decimals`.
fn parse_decimal(s: &str, decimals: usize) -> Result<u128, AmountError> {
    let s = s.trim();
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits_only = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !digits_only(whole) || !digits_only(frac) {
        return Err(AmountError::Parse(s.to_string()));
    }
    if frac.len() > decimals {
        return Err(AmountError::TooPrecise(s.to_string(), decimals));
    }
    let scale = 10u128.pow(decimals as u32);
    let whole: u128 = if whole.is_empty() {
        0
    } else {
        whole
            .parse()
            .map_err(|_| AmountError::Parse(s.to_string()))?
    };
    let frac_val: u128 = if frac.is_empty() {
        0
    } else {
        frac.parse::<u128>()
            .map_err(|_| AmountError::Parse(s.to_string()))?
            * 10u128.pow((decimals - frac.len()) as u32)
    };
    whole
        .checked_mul(scale)
        .and_then(|w| w.checked_add(frac_val))
        .ok_or_else(|| AmountError::Parse(s.to_string()))
}
