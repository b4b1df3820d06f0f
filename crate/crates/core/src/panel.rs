//! Balanced panel data: ingestion, validation, first differences and the
//! cross-sectional average that serves as the factor proxy.
//!
//! A panel holds `N` units observed over the same `T` periods, with a scalar
//! outcome `y[i,t]` and `d` regressors `x[i,t,·]`. Units are stored in ascending
//! label order (numeric when every label parses as an integer) and periods in
//! ascending time order; every downstream reduction walks units in that order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stats::KahanSum;

/// One long-format observation: `(unit, time, y, x1..xd)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRecord {
    pub unit: String,
    pub time: i64,
    pub y: f64,
    pub x: Vec<f64>,
}

/// Balanced `N x T` panel with `d` regressors. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    unit_labels: Vec<String>,
    time_labels: Vec<i64>,
    regressor_names: Vec<String>,
    /// `N x T`.
    y: DMatrix<f64>,
    /// One `T x d` block per unit.
    x: Vec<DMatrix<f64>>,
}

impl PanelData {
    /// Builds a panel from dense arrays. `y` is `N x T` and `x[i]` is the `T x d`
    /// regressor block of unit `i`.
    ///
    /// Single-unit panels are accepted here so that per-unit computations can be
    /// exercised directly; file ingestion through [`validate_panel`] requires at
    /// least two units.
    pub fn new(
        unit_labels: Vec<String>,
        time_labels: Vec<i64>,
        y: DMatrix<f64>,
        x: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = unit_labels.len();
        let t = time_labels.len();
        if n == 0 {
            return Err(Error::TooSmall("panel has no units".into()));
        }
        if t < 2 {
            return Err(Error::TooSmall(format!("need at least 2 periods, got {t}")));
        }
        if y.nrows() != n || y.ncols() != t {
            return Err(Error::InvalidConfig(format!(
                "y is {}x{}, expected {n}x{t}",
                y.nrows(),
                y.ncols()
            )));
        }
        if x.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{} regressor blocks for {n} units",
                x.len()
            )));
        }
        let d = x[0].ncols();
        if d == 0 {
            return Err(Error::TooSmall("need at least one regressor".into()));
        }
        if x.iter().any(|b| b.nrows() != t || b.ncols() != d) {
            return Err(Error::InvalidConfig(format!(
                "every regressor block must be {t}x{d}"
            )));
        }
        if time_labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "time labels must be strictly increasing".into(),
            ));
        }
        {
            let mut seen = HashMap::with_capacity(n);
            for label in &unit_labels {
                if seen.insert(label.as_str(), ()).is_some() {
                    return Err(Error::InvalidConfig(format!(
                        "unit label {label} is not unique"
                    )));
                }
            }
        }
        let regressor_names = (1..=d).map(|k| format!("x{k}")).collect();
        let panel = Self {
            unit_labels,
            time_labels,
            regressor_names,
            y,
            x,
        };
        panel.check_finite()?;
        Ok(panel)
    }

    /// Replaces the regressor names used in reports and CSV output.
    pub fn with_regressor_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_regressors() {
            return Err(Error::InvalidConfig(format!(
                "{} names for {} regressors",
                names.len(),
                self.n_regressors()
            )));
        }
        self.regressor_names = names;
        Ok(self)
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.n_units() {
            for t in 0..self.n_periods() {
                if !self.y[(i, t)].is_finite() {
                    return Err(self.non_finite(i, t, "y".into()));
                }
                for k in 0..self.n_regressors() {
                    if !self.x[i][(t, k)].is_finite() {
                        return Err(self.non_finite(i, t, self.regressor_names[k].clone()));
                    }
                }
            }
        }
        Ok(())
    }

    fn non_finite(&self, i: usize, t: usize, column: String) -> Error {
        Error::NonFiniteValue {
            unit: self.unit_labels[i].clone(),
            time: self.time_labels[t],
            column,
        }
    }

    pub fn n_units(&self) -> usize {
        self.unit_labels.len()
    }

    pub fn n_periods(&self) -> usize {
        self.time_labels.len()
    }

    pub fn n_regressors(&self) -> usize {
        self.x[0].ncols()
    }

    pub fn unit_labels(&self) -> &[String] {
        &self.unit_labels
    }

    pub fn time_labels(&self) -> &[i64] {
        &self.time_labels
    }

    pub fn regressor_names(&self) -> &[String] {
        &self.regressor_names
    }

    /// Outcome matrix, `N x T`.
    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// Time-stacked outcome of unit `i`.
    pub fn unit_y(&self, i: usize) -> DVector<f64> {
        self.y.row(i).transpose()
    }

    /// Time-stacked `T x d` regressors of unit `i`.
    pub fn unit_x(&self, i: usize) -> &DMatrix<f64> {
        &self.x[i]
    }

    pub fn x_blocks(&self) -> &[DMatrix<f64>] {
        &self.x
    }

    /// Panel made of the units at `indices` (with repetition). Repeated units get
    /// suffixed labels so labels stay unique.
    pub fn resample_units(&self, indices: &[usize]) -> PanelData {
        assert!(!indices.is_empty());
        let t = self.n_periods();
        let mut y = DMatrix::zeros(indices.len(), t);
        let mut x = Vec::with_capacity(indices.len());
        let mut labels = Vec::with_capacity(indices.len());
        for (row, &src) in indices.iter().enumerate() {
            y.row_mut(row).copy_from(&self.y.row(src));
            x.push(self.x[src].clone());
            labels.push(format!("{}#{row}", self.unit_labels[src]));
        }
        PanelData {
            unit_labels: labels,
            time_labels: self.time_labels.clone(),
            regressor_names: self.regressor_names.clone(),
            y,
            x,
        }
    }

    /// Reads a long-format CSV panel with header `unit,time,y,x1,...,xd`.
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        if header.len() < 4
            || !header[0].eq_ignore_ascii_case("unit")
            || !header[1].eq_ignore_ascii_case("time")
            || !header[2].eq_ignore_ascii_case("y")
        {
            return Err(Error::Parse {
                line: 1,
                message: "header must be unit,time,y,x1,...,xd with at least one regressor"
                    .into(),
            });
        }
        let names: Vec<String> = header.iter().skip(3).map(str::to_owned).collect();
        let mut records = Vec::new();
        for (idx, row) in rdr.records().enumerate() {
            let line = idx + 2;
            let row = row.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if row.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", header.len(), row.len()),
                });
            }
            let num = |field: usize| -> Result<f64> {
                row[field].parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {} is not a number: {:?}", header[field].to_owned(), &row[field]),
                })
            };
            let time = row[1].parse::<i64>().map_err(|_| Error::Parse {
                line,
                message: format!("time is not an integer: {:?}", &row[1]),
            })?;
            let y = num(2)?;
            let x = (3..row.len()).map(num).collect::<Result<Vec<_>>>()?;
            records.push(PanelRecord {
                unit: row[0].to_owned(),
                time,
                y,
                x,
            });
        }
        validate_panel(records)?.with_regressor_names(names)
    }

    /// Writes the panel in the same long format it is read from. Values are
    /// written with shortest round-trip formatting, so reading back is exact.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["unit".to_owned(), "time".to_owned(), "y".to_owned()];
        header.extend(self.regressor_names.iter().cloned());
        w.write_record(&header).map_err(csv_io)?;
        for i in 0..self.n_units() {
            for t in 0..self.n_periods() {
                let mut row = vec![
                    self.unit_labels[i].clone(),
                    self.time_labels[t].to_string(),
                    self.y[(i, t)].to_string(),
                ];
                row.extend((0..self.n_regressors()).map(|k| self.x[i][(t, k)].to_string()));
                w.write_record(&row).map_err(csv_io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Orders unit labels numerically when both parse as integers, lexically otherwise.
fn label_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Assembles long-format records into a balanced panel.
///
/// Fails on non-finite values, duplicate `(unit, time)` cells, fewer than two units or
/// periods, and missing cells. Rows may come in any order.
pub fn validate_panel(records: Vec<PanelRecord>) -> Result<PanelData> {
    if records.is_empty() {
        return Err(Error::TooSmall("no records".into()));
    }
    let d = records[0].x.len();
    if d == 0 {
        return Err(Error::TooSmall("need at least one regressor".into()));
    }
    let mut cells: BTreeMap<(String, i64), &PanelRecord> = BTreeMap::new();
    for rec in &records {
        if rec.x.len() != d {
            return Err(Error::InvalidConfig(format!(
                "unit {} time {} has {} regressors, expected {d}",
                rec.unit,
                rec.time,
                rec.x.len()
            )));
        }
        if !rec.y.is_finite() {
            return Err(Error::NonFiniteValue {
                unit: rec.unit.clone(),
                time: rec.time,
                column: "y".into(),
            });
        }
        if let Some(k) = rec.x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                unit: rec.unit.clone(),
                time: rec.time,
                column: format!("x{}", k + 1),
            });
        }
        if cells.insert((rec.unit.clone(), rec.time), rec).is_some() {
            return Err(Error::DuplicateCell {
                unit: rec.unit.clone(),
                time: rec.time,
            });
        }
    }

    let mut units: Vec<String> = records.iter().map(|r| r.unit.clone()).collect();
    units.sort_by(|a, b| label_cmp(a, b));
    units.dedup();
    let mut times: Vec<i64> = records.iter().map(|r| r.time).collect();
    times.sort_unstable();
    times.dedup();

    if units.len() < 2 || times.len() < 2 {
        return Err(Error::TooSmall(format!(
            "need N >= 2 and T >= 2, got N = {}, T = {}",
            units.len(),
            times.len()
        )));
    }

    let (n, t) = (units.len(), times.len());
    let mut y = DMatrix::zeros(n, t);
    let mut x = Vec::with_capacity(n);
    for (i, unit) in units.iter().enumerate() {
        let mut block = DMatrix::zeros(t, d);
        for (s, &time) in times.iter().enumerate() {
            let rec = cells
                .get(&(unit.clone(), time))
                .ok_or_else(|| Error::UnbalancedPanel {
                    unit: unit.clone(),
                    time,
                })?;
            y[(i, s)] = rec.y;
            for k in 0..d {
                block[(s, k)] = rec.x[k];
            }
        }
        x.push(block);
    }
    PanelData::new(units, times, y, x)
}

/// First differences `s_t - s_{t-1}` of the outcome and every regressor, per unit.
/// The result keeps the labels of periods `2..T`.
pub fn first_difference(panel: &PanelData) -> Result<PanelData> {
    let t = panel.n_periods();
    if t < 3 {
        return Err(Error::TooSmall(format!(
            "first differencing needs at least 3 periods, got {t}"
        )));
    }
    let n = panel.n_units();
    let d = panel.n_regressors();
    let y = DMatrix::from_fn(n, t - 1, |i, s| panel.y[(i, s + 1)] - panel.y[(i, s)]);
    let x = panel
        .x
        .iter()
        .map(|b| DMatrix::from_fn(t - 1, d, |s, k| b[(s + 1, k)] - b[(s, k)]))
        .collect();
    Ok(PanelData {
        unit_labels: panel.unit_labels.clone(),
        time_labels: panel.time_labels[1..].to_vec(),
        regressor_names: panel.regressor_names.clone(),
        y,
        x,
    })
}

/// Cross-sectional averages `[ȳ_t, x̄_{1,t}, ..., x̄_{d,t}]`, one row per period.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorProxy {
    values: DMatrix<f64>,
}

impl FactorProxy {
    /// Wraps a `T x (d+1)` matrix of proxy values.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("factor proxy must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_periods(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, r: usize) -> Vec<f64> {
        self.values.column(r).iter().copied().collect()
    }
}

/// Equal-weight cross-sectional mean of `z_{i,t} = [y_{i,t}, x_{i,t}']`.
///
/// Sums run over units in stored (ascending label) order with Kahan compensation.
pub fn cross_sectional_average(panel: &PanelData) -> FactorProxy {
    let n = panel.n_units();
    let t = panel.n_periods();
    let d = panel.n_regressors();
    let inv_n = 1.0 / n as f64;
    let mut values = DMatrix::zeros(t, d + 1);
    for s in 0..t {
        let ybar: KahanSum = (0..n).map(|i| panel.y[(i, s)]).collect();
        values[(s, 0)] = ybar.total() * inv_n;
        for k in 0..d {
            let xbar: KahanSum = panel.x.iter().map(|b| b[(s, k)]).collect();
            values[(s, k + 1)] = xbar.total() * inv_n;
        }
    }
    FactorProxy { values }
}
