use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A calendar month, stored as a running month count (`year * 12 + month - 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month(i32);

impl Month {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Parameter(format!("month {month} outside 1..=12")));
        }
        Ok(Month(year * 12 + month as i32 - 1))
    }

    /// Parses the `YYYYMM` key used in the panel files.
    pub fn from_yyyymm(key: &str) -> Result<Self> {
        let key = key.trim();
        let digits = key.split('.').next().unwrap_or(key);
        if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parameter(format!("`{key}` is not a YYYYMM month key")));
        }
        let year: i32 = digits[..4].parse().expect("checked digits");
        let month: u32 = digits[4..].parse().expect("checked digits");
        Month::new(year, month)
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    /// 1-based calendar month.
    pub fn month(self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    pub fn yyyymm(self) -> u32 {
        self.year() as u32 * 100 + self.month()
    }

    pub fn index(self) -> i32 {
        self.0
    }

    pub fn offset(self, months: i32) -> Month {
        Month(self.0 + months)
    }

    /// Signed month count from `other` to `self`.
    pub fn since(self, other: Month) -> i32 {
        self.0 - other.0
    }

    pub fn succ(self) -> Month {
        self.offset(1)
    }

    /// First year of the decade containing this month (1955 → 1950).
    pub fn decade(self) -> i32 {
        self.year().div_euclid(10) * 10
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for Month {
    type Err = Error;

    /// Accepts `YYYY-MM` or `YYYYMM`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((y, m)) = s.split_once('-') {
            let year = y
                .parse()
                .map_err(|_| Error::Parameter(format!("bad year in `{s}`")))?;
            let month = m
                .parse()
                .map_err(|_| Error::Parameter(format!("bad month in `{s}`")))?;
            Month::new(year, month)
        } else {
            Month::from_yyyymm(s)
        }
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
