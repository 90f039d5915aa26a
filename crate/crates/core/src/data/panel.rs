use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Month;
use crate::error::{Error, Result};

/// Canonical short names of the twelve monthly predictors, in panel order.
pub const DEFAULT_PREDICTORS: [&str; 12] = [
    "dp",   // dividend yield (log)
    "ep",   // log earnings-price ratio
    "de",   // dividend payout ratio
    "bm",   // book-to-market
    "ntis", // net equity expansion
    "tbl",  // T-bill rate
    "tms",  // term spread
    "dfy",  // default yield spread
    "dfr",  // default return spread
    "csp",  // cross-sectional premium
    "infl", // inflation growth
    "svar", // monthly stock variance
];

/// Predictor used by the single-variable regressions.
pub const DIVIDEND_YIELD: &str = "dp";

/// Aligned monthly series: log excess returns, risk-free log yield and a
/// predictor matrix stored row-major (one row per month).
///
/// Row `t` holds the return realized over month `t` and predictors observed
/// at the end of month `t`, so a forecast of `excess_return[t + 1]` may use
/// every row up to and including `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    dates: Vec<Month>,
    excess_return: Vec<f64>,
    rf_yield: Vec<f64>,
    predictor_names: Vec<String>,
    predictors: Vec<f64>,
}

impl Panel {
    /// Builds a panel and checks every invariant: consecutive months, equal
    /// lengths, finite values.
    pub fn new(
        dates: Vec<Month>,
        excess_return: Vec<f64>,
        rf_yield: Vec<f64>,
        predictor_names: Vec<String>,
        predictors: Vec<f64>,
    ) -> Result<Self> {
        let n = dates.len();
        let k = predictor_names.len();
        if excess_return.len() != n || rf_yield.len() != n || predictors.len() != n * k {
            return Err(Error::Validation(format!(
                "series lengths differ: {} dates, {} returns, {} yields, {} predictor cells for {} predictors",
                n,
                excess_return.len(),
                rf_yield.len(),
                predictors.len(),
                k
            )));
        }
        for w in dates.windows(2) {
            if w[1] != w[0].succ() {
                return Err(Error::Validation(format!(
                    "calendar gap: {} is followed by {}",
                    w[0], w[1]
                )));
            }
        }
        let check = |name: &str, v: &[f64]| -> Result<()> {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("non-finite {name} at row {i}")));
            }
            Ok(())
        };
        check("excess return", &excess_return)?;
        check("risk-free yield", &rf_yield)?;
        check("predictor", &predictors)?;
        Ok(Panel {
            dates,
            excess_return,
            rf_yield,
            predictor_names,
            predictors,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_predictors(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn start(&self) -> Option<Month> {
        self.dates.first().copied()
    }

    pub fn end(&self) -> Option<Month> {
        self.dates.last().copied()
    }

    pub fn excess_return(&self) -> &[f64] {
        &self.excess_return
    }

    pub fn rf_yield(&self) -> &[f64] {
        &self.rf_yield
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    pub fn predictor_index(&self, name: &str) -> Option<usize> {
        self.predictor_names.iter().position(|p| p == name)
    }

    /// Predictor vector observed at the end of row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.n_predictors();
        &self.predictors[i * k..(i + 1) * k]
    }

    pub fn predictor_matrix(&self) -> &[f64] {
        &self.predictors
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.row(i)[j]).collect()
    }

    /// Row index of `month`, if the panel covers it.
    pub fn position(&self, month: Month) -> Option<usize> {
        let start = self.start()?;
        let i = month.since(start);
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    /// Copy of the rows in `range`.
    pub fn rows(&self, range: Range<usize>) -> Panel {
        let k = self.n_predictors();
        Panel {
            dates: self.dates[range.clone()].to_vec(),
            excess_return: self.excess_return[range.clone()].to_vec(),
            rf_yield: self.rf_yield[range.clone()].to_vec(),
            predictor_names: self.predictor_names.clone(),
            predictors: self.predictors[range.start * k..range.end * k].to_vec(),
        }
    }

    /// Rows whose date lies in `[from, to]`.
    pub fn between(&self, from: Month, to: Month) -> Panel {
        let lo = self.dates.partition_point(|d| *d < from);
        let hi = self.dates.partition_point(|d| *d <= to);
        self.rows(lo..hi.max(lo))
    }

    /// Keeps only the named predictors (in the given order).
    pub fn select_predictors(&self, names: &[&str]) -> Result<Panel> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.predictor_index(n)
                    .ok_or_else(|| Error::Schema(format!("panel has no predictor `{n}`")))
            })
            .collect::<Result<_>>()?;
        let mut predictors = Vec::with_capacity(self.len() * idx.len());
        for i in 0..self.len() {
            let row = self.row(i);
            predictors.extend(idx.iter().map(|&j| row[j]));
        }
        Ok(Panel {
            dates: self.dates.clone(),
            excess_return: self.excess_return.clone(),
            rf_yield: self.rf_yield.clone(),
            predictor_names: names.iter().map(|s| s.to_string()).collect(),
            predictors,
        })
    }

    /// SHA-256 over the exact bit patterns of every field.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.dates {
            h.update(d.index().to_le_bytes());
        }
        for name in &self.predictor_names {
            h.update(name.as_bytes());
            h.update([0u8]);
        }
        for series in [&self.excess_return, &self.rf_yield, &self.predictors] {
            for v in series.iter() {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}
