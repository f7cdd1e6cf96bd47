//! Exact fixed-point budget arithmetic.
//!
//! Every cost and budget is held as an integer count of micro-units
//! (1 unit = 1_000_000 micros), so sums and comparisons never round.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Micro-units per whole unit of money.
pub const MICROS_PER_UNIT: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoneyError {
    #[error("empty amount")]
    Empty,
    #[error("malformed amount `{0}`")]
    Malformed(String),
    #[error("amount `{0}` has more than 6 decimal places")]
    TooPrecise(String),
    #[error("amount `{0}` is out of range")]
    OutOfRange(String),
}

/// A fixed-point amount with six decimal places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);
    pub const ONE: Money = Money(MICROS_PER_UNIT);
    /// The smallest representable positive amount.
    pub const TICK: Money = Money(1);

    pub const fn from_micros(micros: i64) -> Self {
        Money(micros)
    }

    pub const fn from_units(units: i64) -> Self {
        Money(units * MICROS_PER_UNIT)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    /// Whole units contained in this amount (floor for non-negative values).
    pub fn whole_units(self) -> i64 {
        self.0.div_euclid(MICROS_PER_UNIT)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_UNIT as f64
    }

    /// Converts a float that is already a multiple of one micro-unit.
    ///
    /// Values that are not within `1e-9` of a micro multiple are rejected rather
    /// than silently rounded.
    pub fn from_f64_exact(value: f64) -> Result<Self, MoneyError> {
        if !value.is_finite() || value.abs() > 9.0e12 {
            return Err(MoneyError::OutOfRange(value.to_string()));
        }
        let scaled = value * MICROS_PER_UNIT as f64;
        let micros = scaled.round();
        if (scaled - micros).abs() > 1e-3 {
            return Err(MoneyError::TooPrecise(value.to_string()));
        }
        Ok(Money(micros as i64))
    }

    /// Largest amount strictly below `bound`, i.e. `x < bound <=> x <= strictly_below(bound)`.
    pub fn strictly_below(bound: f64) -> Self {
        let micros = (bound * MICROS_PER_UNIT as f64).ceil() as i64;
        Money(micros - 1)
    }

    pub fn checked_sub(self, other: Money) -> Option<Money> {
        self.0.checked_sub(other.0).map(Money)
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let unit = MICROS_PER_UNIT as u64;
        write!(f, "{sign}{}.{:06}", abs / unit, abs % unit)
    }
}

impl FromStr for Money {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(MoneyError::Empty);
        }
        let malformed = || MoneyError::Malformed(s.to_string());
        let (negative, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(malformed());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        let frac_digits = frac_part.trim_end_matches('0');
        if frac_digits.len() > 6 {
            return Err(MoneyError::TooPrecise(s.to_string()));
        }
        let units: i64 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| MoneyError::OutOfRange(s.to_string()))?
        };
        let mut frac: i64 = 0;
        for (i, b) in frac_digits.bytes().enumerate() {
            frac += i64::from(b - b'0') * 10_i64.pow(5 - i as u32);
        }
        let micros = units
            .checked_mul(MICROS_PER_UNIT)
            .and_then(|m| m.checked_add(frac))
            .ok_or_else(|| MoneyError::OutOfRange(s.to_string()))?;
        Ok(Money(if negative { -micros } else { micros }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!("2.3".parse::<Money>().unwrap(), Money::from_micros(2_300_000));
        assert_eq!("0.000001".parse::<Money>().unwrap(), Money::TICK);
        assert_eq!("1".parse::<Money>().unwrap(), Money::ONE);
        assert_eq!(".5".parse::<Money>().unwrap(), Money::from_micros(500_000));
        assert_eq!("1.5000000".parse::<Money>().unwrap(), Money::from_micros(1_500_000));
        assert_eq!("-0.25".parse::<Money>().unwrap(), Money::from_micros(-250_000));
    }

    #[test]
    fn rejects_excess_precision_and_garbage() {
        assert!(matches!("0.0000001".parse::<Money>(), Err(MoneyError::TooPrecise(_))));
        assert!(matches!("1.2.3".parse::<Money>(), Err(MoneyError::Malformed(_))));
        assert!(matches!("abc".parse::<Money>(), Err(MoneyError::Malformed(_))));
        assert!(matches!("".parse::<Money>(), Err(MoneyError::Empty)));
        assert!(matches!(".".parse::<Money>(), Err(MoneyError::Malformed(_))));
    }

    #[test]
    fn displays_six_places() {
        assert_eq!(Money::from_micros(2_300_000).to_string(), "2.300000");
        assert_eq!(Money::ZERO.to_string(), "0.000000");
        assert_eq!(Money::from_micros(-1).to_string(), "-0.000001");
    }

    #[test]
    fn strict_bound_is_one_tick_below() {
        assert_eq!(Money::strictly_below(1.0), Money::from_micros(999_999));
        assert_eq!(Money::strictly_below(0.3), Money::from_micros(299_999));
        let b = 1.622_381_186;
        let cap = Money::strictly_below(b);
        assert!(cap.to_f64() < b);
        assert!((cap + Money::TICK).to_f64() >= b);
    }

    #[test]
    fn from_f64_requires_micro_multiple() {
        assert_eq!(Money::from_f64_exact(0.3).unwrap(), Money::from_micros(300_000));
        assert!(Money::from_f64_exact(0.123_456_7).is_err());
        assert!(Money::from_f64_exact(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn display_round_trips(micros in -10_000_000_000i64..10_000_000_000) {
            let m = Money::from_micros(micros);
            prop_assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
        }

        #[test]
        fn sums_are_order_independent(mut terms in prop::collection::vec(0i64..=1_000_000, 0..2000), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let forward: Money = terms.iter().map(|&t| Money::from_micros(t)).sum();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            terms.shuffle(&mut rng);
            let shuffled: Money = terms.iter().map(|&t| Money::from_micros(t)).sum();
            prop_assert_eq!(forward, shuffled);
        }
    }

    #[test]
    fn million_term_sum_is_exact() {
        let total: Money = (0..1_000_000).map(|i| Money::from_micros(i % 1_000_001)).sum();
        let reversed: Money = (0..1_000_000).rev().map(|i| Money::from_micros(i % 1_000_001)).sum();
        assert_eq!(total, reversed);
        assert_eq!(total.micros(), 999_999 * 1_000_000 / 2);
    }
}
