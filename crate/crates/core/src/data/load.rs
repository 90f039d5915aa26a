use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{Month, Panel, DEFAULT_PREDICTORS};
use crate::error::{Error, Result};

/// What to do with missing cells in predictors that are allowed to have gaps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Remove the predictor from the panel.
    #[default]
    DropFeature,
    /// Carry the last observed value forward; a leading gap is zero-filled.
    ForwardFill,
    ZeroFill,
}

/// Maps the canonical series onto the column headers of a delimited file,
/// and carries the sample range to keep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSchema {
    pub date_column: String,
    pub excess_return_column: String,
    pub rf_column: String,
    /// Canonical predictor name → file column. Order of `predictors` is the
    /// panel order; names missing from the map use the canonical name.
    pub columns: BTreeMap<String, String>,
    pub predictors: Vec<String>,
    pub sample_start: Month,
    pub sample_end: Month,
    /// Predictors whose cells may be blank or `NA`.
    pub allow_missing: Vec<String>,
    pub missing_policy: MissingPolicy,
}

impl Default for DataSchema {
    fn default() -> Self {
        DataSchema {
            date_column: "yyyymm".into(),
            excess_return_column: "excess_return".into(),
            rf_column: "rf".into(),
            columns: BTreeMap::new(),
            predictors: DEFAULT_PREDICTORS.iter().map(|s| s.to_string()).collect(),
            sample_start: Month::new(1945, 1).expect("valid"),
            sample_end: Month::new(2018, 12).expect("valid"),
            allow_missing: vec!["csp".into()],
            missing_policy: MissingPolicy::DropFeature,
        }
    }
}

impl DataSchema {
    fn column_for<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.columns.get(canonical).map(String::as_str).unwrap_or(canonical)
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "NaN" | "nan" | "." | "null")
}

/// Reads a comma-separated panel (header row, one row per month, `YYYYMM`
/// keys) and returns the validated panel restricted to the schema's sample
/// range.
pub fn load_panel(path: impl AsRef<Path>, schema: &DataSchema) -> Result<Panel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel(file, schema)
}

pub fn read_panel<R: Read>(reader: R, schema: &DataSchema) -> Result<Panel> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?
        .clone();
    let find = |col: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| Error::Schema(format!("missing column `{col}`")))
    };
    let date_idx = find(&schema.date_column)?;
    let ret_idx = find(&schema.excess_return_column)?;
    let rf_idx = find(&schema.rf_column)?;
    let pred_idx: Vec<usize> = schema
        .predictors
        .iter()
        .map(|p| find(schema.column_for(p)))
        .collect::<Result<_>>()?;

    let mut dates = Vec::new();
    let mut ret = Vec::new();
    let mut rf = Vec::new();
    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::new(); pred_idx.len()];

    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let get = |idx: usize| record.get(idx).unwrap_or("");
        let date = Month::from_yyyymm(get(date_idx)).map_err(|e| Error::Parse {
            row,
            column: schema.date_column.clone(),
            message: e.to_string(),
        })?;
        if date < schema.sample_start || date > schema.sample_end {
            continue;
        }
        let number = |idx: usize, column: &str| -> Result<f64> {
            let cell = get(idx);
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    column: column.to_string(),
                    message: format!("`{cell}` is not a finite number"),
                })
        };
        dates.push(date);
        ret.push(number(ret_idx, &schema.excess_return_column)?);
        rf.push(number(rf_idx, &schema.rf_column)?);
        for (j, &idx) in pred_idx.iter().enumerate() {
            let name = &schema.predictors[j];
            let cell = get(idx);
            if is_missing(cell) && schema.allow_missing.iter().any(|a| a == name) {
                cells[j].push(None);
            } else {
                cells[j].push(Some(number(idx, schema.column_for(name))?));
            }
        }
    }

    let mut names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (name, col) in schema.predictors.iter().zip(cells) {
        let n_missing = col.iter().filter(|c| c.is_none()).count();
        if n_missing == 0 {
            names.push(name.clone());
            columns.push(col.into_iter().map(|c| c.expect("no gaps")).collect());
            continue;
        }
        match schema.missing_policy {
            MissingPolicy::DropFeature => {
                warn!("dropping predictor `{name}`: {n_missing} missing months in sample");
            }
            MissingPolicy::ForwardFill => {
                info!("forward-filling {n_missing} missing months of `{name}`");
                let mut last = 0.0;
                names.push(name.clone());
                columns.push(
                    col.into_iter()
                        .map(|c| {
                            if let Some(v) = c {
                                last = v;
                            }
                            last
                        })
                        .collect(),
                );
            }
            MissingPolicy::ZeroFill => {
                info!("zero-filling {n_missing} missing months of `{name}`");
                names.push(name.clone());
                columns.push(col.into_iter().map(|c| c.unwrap_or(0.0)).collect());
            }
        }
    }

    let n = dates.len();
    let mut predictors = Vec::with_capacity(n * names.len());
    for i in 0..n {
        predictors.extend(columns.iter().map(|c| c[i]));
    }
    Panel::new(dates, ret, rf, names, predictors)
}

/// Writes a panel with canonical headers. Values use the shortest
/// representation that parses back to the same bits.
pub fn write_panel<W: Write>(panel: &Panel, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["yyyymm".to_string(), "excess_return".into(), "rf".into()];
    header.extend(panel.predictor_names().iter().cloned());
    let wrap = |e: csv::Error| Error::Serde(e.to_string());
    w.write_record(&header).map_err(wrap)?;
    for i in 0..panel.len() {
        let mut rec = vec![
            panel.dates()[i].yyyymm().to_string(),
            panel.excess_return()[i].to_string(),
            panel.rf_yield()[i].to_string(),
        ];
        rec.extend(panel.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(())
}

pub fn save_panel(panel: &Panel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_panel(panel, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(preds: &[&str]) -> DataSchema {
        DataSchema {
            predictors: preds.iter().map(|s| s.to_string()).collect(),
            sample_start: Month::new(1900, 1).unwrap(),
            sample_end: Month::new(2100, 12).unwrap(),
            ..DataSchema::default()
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let csv = "yyyymm,excess_return,rf\n200001,0.1,0.0\n";
        let err = read_panel(csv.as_bytes(), &schema(&["dp"])).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let csv = "yyyymm,excess_return,rf,dp\n200001,0.1,0.0,1\n200002,abc,0.0,1\n";
        match read_panel(csv.as_bytes(), &schema(&["dp"])).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "excess_return");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn calendar_gap_is_validation_error() {
        let csv = "yyyymm,excess_return,rf,dp\n200001,0.1,0.0,1\n200003,0.1,0.0,1\n";
        let err = read_panel(csv.as_bytes(), &schema(&["dp"])).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn sample_range_filters_rows() {
        let csv = "yyyymm,excess_return,rf,dp\n199912,0.1,0.0,1\n200001,0.2,0.0,1\n200002,0.3,0.0,1\n";
        let mut s = schema(&["dp"]);
        s.sample_start = Month::new(2000, 1).unwrap();
        s.sample_end = Month::new(2000, 1).unwrap();
        let p = read_panel(csv.as_bytes(), &s).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.excess_return(), &[0.2]);
    }

    #[test]
    fn missing_policies() {
        let csv = "yyyymm,excess_return,rf,dp,csp\n200001,0.1,0.0,1,NA\n200002,0.1,0.0,2,0.5\n200003,0.1,0.0,3,\n";
        let mut s = schema(&["dp", "csp"]);
        let dropped = read_panel(csv.as_bytes(), &s).unwrap();
        assert_eq!(dropped.predictor_names(), &["dp".to_string()]);

        s.missing_policy = MissingPolicy::ForwardFill;
        let ff = read_panel(csv.as_bytes(), &s).unwrap();
        assert_eq!(ff.column(1), vec![0.0, 0.5, 0.5]);

        s.missing_policy = MissingPolicy::ZeroFill;
        let zf = read_panel(csv.as_bytes(), &s).unwrap();
        assert_eq!(zf.column(1), vec![0.0, 0.5, 0.0]);

        // Gaps outside the allow-list are parse errors.
        s.allow_missing.clear();
        assert!(matches!(
            read_panel(csv.as_bytes(), &s),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn renamed_columns_map_to_canonical() {
        let canonical = "yyyymm,excess_return,rf,dp\n200001,0.1,0.0,1.5\n";
        let renamed = "date,ret,rfree,D/P\n200001,0.1,0.0,1.5\n";
        let mut s = schema(&["dp"]);
        let a = read_panel(canonical.as_bytes(), &s).unwrap();
        s.date_column = "date".into();
        s.excess_return_column = "ret".into();
        s.rf_column = "rfree".into();
        s.columns.insert("dp".into(), "D/P".into());
        let b = read_panel(renamed.as_bytes(), &s).unwrap();
        assert_eq!(a, b);
    }
}
