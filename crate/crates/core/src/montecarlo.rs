//! Monte Carlo runner for the canned designs.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate, Method};
use crate::sieve::SieveConfig;
use crate::simulate::{
    generate_with_rng, stream_rng, Dgp, DgpConfig, ErrorMode, FactorMode, LoadingLaw,
    DOMAIN_MONTE_CARLO,
};
use crate::stats::KahanSum;

pub const SCHEMA_VERSION: u32 = 1;

/// Design and estimator for every cell of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dgp: Dgp,
    pub method: Method,
    pub sieve: SieveConfig,
    pub beta: Vec<f64>,
    pub factor_mode: FactorMode,
    pub error_mode: ErrorMode,
    pub loading_law: LoadingLaw,
}

impl McConfig {
    pub fn new(dgp: Dgp, method: Method) -> Self {
        Self {
            dgp,
            method,
            sieve: SieveConfig::default(),
            beta: vec![1.0, 1.0],
            factor_mode: FactorMode::Stationary,
            error_mode: ErrorMode::Iid,
            loading_law: LoadingLaw::Standard,
        }
    }

    pub fn dgp_config(&self, n: usize, t: usize) -> DgpConfig {
        DgpConfig {
            dgp: self.dgp,
            n,
            t,
            beta: self.beta.clone(),
            factor_mode: self.factor_mode,
            error_mode: self.error_mode,
            loading_law: self.loading_law,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefSummary {
    /// 1-based coefficient index.
    pub coef: usize,
    /// `|mean(β̂ - β)|`
    pub abs_bias: f64,
    /// `mean |β̂ - β|`
    pub mean_abs_error: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub n: usize,
    pub t: usize,
    pub dgp: Dgp,
    pub estimator: Method,
    pub reps: usize,
    pub skipped: usize,
    pub coefficients: Vec<CoefSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub schema_version: u32,
    pub seed: u64,
    pub reps: usize,
    pub config: McConfig,
    pub cells: Vec<McCell>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    n: usize,
    t: usize,
    dgp: &'a str,
    estimator: &'a str,
    coef: usize,
    abs_bias: f64,
    rmse: f64,
    reps: usize,
    skipped: usize,
}

impl McReport {
    pub fn cell(&self, n: usize, t: usize) -> Option<&McCell> {
        self.cells.iter().find(|c| c.n == n && c.t == t)
    }

    pub fn skipped(&self) -> usize {
        self.cells.iter().map(|c| c.skipped).sum()
    }

    /// One row per cell and coefficient.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for cell in &self.cells {
            let dgp = cell.dgp.to_string();
            for c in &cell.coefficients {
                w.serialize(CsvRow {
                    n: cell.n,
                    t: cell.t,
                    dgp: &dgp,
                    estimator: cell.estimator.as_str(),
                    coef: c.coef,
                    abs_bias: c.abs_bias,
                    rmse: c.rmse,
                    reps: cell.reps,
                    skipped: cell.skipped,
                })
                .map_err(csv_error)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Estimation error of one replication, or `None` if it failed numerically.
pub fn replicate(
    config: &McConfig,
    n: usize,
    t: usize,
    seed: u64,
    cell: usize,
    rep: usize,
) -> Result<Option<DVector<f64>>> {
    let mut rng = stream_rng(seed, DOMAIN_MONTE_CARLO, cell as u64, rep as u64);
    let sim = generate_with_rng(&config.dgp_config(n, t), &mut rng)?;
    match estimate(&sim.panel, config.method, &config.sieve) {
        Ok(fit) => Ok(Some(fit.beta - DVector::from_column_slice(&config.beta))),
        Err(e) if e.is_numerical() => Ok(None),
        Err(e) => Err(e),
    }
}

fn summarize(errors: &[DVector<f64>], d: usize) -> Vec<CoefSummary> {
    let count = errors.len() as f64;
    (0..d)
        .map(|k| {
            let mut sum = KahanSum::new();
            let mut abs = KahanSum::new();
            let mut sq = KahanSum::new();
            for e in errors {
                sum.add(e[k]);
                abs.add(e[k].abs());
                sq.add(e[k] * e[k]);
            }
            let abs_bias = (sum.total() / count).abs();
            let mean_abs_error = abs.total() / count;
            // round-off can break the Jensen ordering by an ulp
            let rmse = (sq.total() / count).sqrt().max(mean_abs_error).max(abs_bias);
            CoefSummary {
                coef: k + 1,
                abs_bias,
                mean_abs_error,
                rmse,
            }
        })
        .collect()
}

/// Runs `reps` replications on every `(N, T)` of `grid`.
///
/// Replication `rep` of cell `c` draws from stream `(seed, c, rep)`, so results do
/// not depend on the number of worker threads. Errors are aggregated in
/// replication order with compensated sums. Numerical failures are skipped; more
/// than 1% skipped in a cell is an error.
pub fn monte_carlo_run(
    grid: &[(usize, usize)],
    config: &McConfig,
    reps: usize,
    seed: u64,
) -> Result<McReport> {
    if reps == 0 {
        return Err(Error::InvalidConfig("need at least one replication".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty (N, T) grid".into()));
    }
    let d = config.beta.len();
    let mut cells = Vec::with_capacity(grid.len());
    for (c, &(n, t)) in grid.iter().enumerate() {
        let outcomes: Vec<Result<Option<DVector<f64>>>> = (0..reps)
            .into_par_iter()
            .map(|rep| replicate(config, n, t, seed, c, rep))
            .collect();
        let mut errors = Vec::with_capacity(reps);
        for o in outcomes {
            if let Some(e) = o? {
                errors.push(e);
            }
        }
        let skipped = reps - errors.len();
        if skipped * 100 > reps || errors.is_empty() {
            return Err(Error::TooManySkipped {
                skipped,
                total: reps,
            });
        }
        cells.push(McCell {
            n,
            t,
            dgp: config.dgp,
            estimator: config.method,
            reps,
            skipped,
            coefficients: summarize(&errors, d),
        });
    }
    Ok(McReport {
        schema_version: SCHEMA_VERSION,
        seed,
        reps,
        config: config.clone(),
        cells,
    })
}
