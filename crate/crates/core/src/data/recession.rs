use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Month, Panel};
use crate::error::{Error, Result};

const NBER_TABLE: &str = include_str!("../../fixtures/nber_recessions.csv");

/// Version tag of the embedded reference-date table.
pub const NBER_TABLE_VERSION: &str = "2023-03";

/// Sorted, non-overlapping recession intervals, both ends inclusive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecessionCalendar {
    intervals: Vec<(Month, Month)>,
}

impl RecessionCalendar {
    pub fn new(mut intervals: Vec<(Month, Month)>) -> Result<Self> {
        intervals.sort();
        for &(a, b) in &intervals {
            if b < a {
                return Err(Error::Validation(format!("recession interval {a}..{b} is reversed")));
            }
        }
        for w in intervals.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::Validation(format!(
                    "recession intervals {}..{} and {}..{} overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(RecessionCalendar { intervals })
    }

    /// The embedded NBER table.
    pub fn nber() -> Self {
        Self::parse_peak_trough(NBER_TABLE).expect("embedded NBER table is valid")
    }

    /// Reads a `peak,trough` table of `YYYYMM` keys (lines starting with `#`
    /// are comments). Each recession covers peak+1 through trough.
    pub fn parse_peak_trough(text: &str) -> Result<Self> {
        let mut intervals = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') || line.starts_with("peak") {
                continue;
            }
            let (peak, trough) = line
                .split_once(',')
                .ok_or_else(|| Error::Schema(format!("bad recession line `{line}`")))?;
            let peak = Month::from_yyyymm(peak)?;
            let trough = Month::from_yyyymm(trough)?;
            intervals.push((peak.succ(), trough));
        }
        Self::new(intervals)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_peak_trough(&text)
    }

    pub fn intervals(&self) -> &[(Month, Month)] {
        &self.intervals
    }

    pub fn contains(&self, month: Month) -> bool {
        let i = self.intervals.partition_point(|&(_, end)| end < month);
        self.intervals.get(i).is_some_and(|&(start, _)| start <= month)
    }

    pub fn mask(&self, dates: &[Month]) -> Vec<bool> {
        dates.iter().map(|&d| self.contains(d)).collect()
    }
}

/// True for each panel month inside a recession.
pub fn recession_mask(panel: &Panel, cal: &RecessionCalendar) -> Vec<bool> {
    cal.mask(panel.dates())
}
