use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Month, Panel};
use crate::error::{Error, Result};

/// Training-window rule: all history, or a fixed number of trailing months.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowSpec {
    Expanding,
    Rolling { length_months: usize },
}

impl WindowSpec {
    pub const TEN_YEARS: WindowSpec = WindowSpec::Rolling { length_months: 120 };
    pub const TWENTY_YEARS: WindowSpec = WindowSpec::Rolling { length_months: 240 };

    pub fn rolling(length_months: usize) -> Result<Self> {
        if length_months == 0 {
            return Err(Error::Parameter("rolling window length must be positive".into()));
        }
        Ok(WindowSpec::Rolling { length_months })
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSpec::Expanding => write!(f, "expanding"),
            WindowSpec::Rolling { length_months } => write!(f, "rolling{length_months}"),
        }
    }
}

/// Rows of `panel` visible at the end of month `end` under `spec`.
pub fn slice_window(panel: &Panel, end: Month, spec: WindowSpec) -> Result<Panel> {
    let last = panel.position(end).ok_or_else(|| {
        Error::Parameter(format!(
            "window end {end} outside panel range {}..{}",
            panel.start().map(|m| m.to_string()).unwrap_or_default(),
            panel.end().map(|m| m.to_string()).unwrap_or_default()
        ))
    })?;
    let first = match spec {
        WindowSpec::Expanding => 0,
        WindowSpec::Rolling { length_months } => {
            if length_months == 0 {
                return Err(Error::Parameter("rolling window length must be positive".into()));
            }
            if last + 1 < length_months {
                return Err(Error::WindowUnderflow {
                    end: end.to_string(),
                    needed: length_months,
                    available: last + 1,
                });
            }
            last + 1 - length_months
        }
    };
    Ok(panel.rows(first..last + 1))
}
