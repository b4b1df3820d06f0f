//! Pooled and mean-group common correlated effects estimators.
//!
//! All three estimators project every unit's `[y_i, X_i]` off a shared `T x K`
//! matrix and then solve small `d x d` systems. SCCE uses the sieve basis built
//! from the cross-sectional averages; CCEP and CCEMG use `[1, F]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{passes_eigen_gate, spd_solve, Annihilator};
use crate::panel::{cross_sectional_average, FactorProxy, PanelData};
use crate::sieve::{SieveBasis, SieveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Scce,
    Ccep,
    Ccemg,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Scce => "scce",
            Method::Ccep => "ccep",
            Method::Ccemg => "ccemg",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scce" => Ok(Method::Scce),
            "ccep" => Ok(Method::Ccep),
            "ccemg" => Ok(Method::Ccemg),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub beta: DVector<f64>,
    pub method: Method,
    /// Projected residuals `M (y_i - X_i beta)`, one row per unit (`N x T`).
    pub eps_hat: DMatrix<f64>,
    /// Projected regressors `M X_i`, one `T x d` block per unit.
    pub v_hat: Vec<DMatrix<f64>>,
    pub projection_rank: usize,
    /// Unit-level coefficients (`N x d`), mean-group only.
    pub per_unit_betas: Option<DMatrix<f64>>,
}

impl EstimationResult {
    pub fn n_units(&self) -> usize {
        self.eps_hat.nrows()
    }

    pub fn n_periods(&self) -> usize {
        self.eps_hat.ncols()
    }

    pub fn n_regressors(&self) -> usize {
        self.beta.len()
    }
}

/// `[1_T, F]`: intercept plus the cross-sectional averages.
pub fn ccep_columns(proxy: &FactorProxy) -> DMatrix<f64> {
    let f = proxy.values();
    let t = f.nrows();
    let mut a = DMatrix::from_element(t, f.ncols() + 1, 1.0);
    a.columns_mut(1, f.ncols()).copy_from(f);
    a
}

/// Eigenvalue gate on the projected Gram matrix. Besides the relative test, the
/// smallest eigenvalue must stand out from round-off at the scale of the raw
/// regressors; otherwise a projection that removes everything leaves noise that
/// looks well conditioned.
fn design_gate(gram: &DMatrix<f64>, raw: &DMatrix<f64>) -> (bool, f64, f64) {
    let (ok, lo, hi) = passes_eigen_gate(gram);
    (ok && lo > 1e-14 * raw.trace(), lo, hi)
}

/// Annihilated `y_i` (as a `T`-vector) and `X_i` per unit.
struct Projected {
    y: Vec<DVector<f64>>,
    x: Vec<DMatrix<f64>>,
}

fn project_units(panel: &PanelData, m: &Annihilator) -> Projected {
    let (n, t, d) = (panel.n_units(), panel.n_periods(), panel.n_regressors());
    let width = 1 + d;
    // one wide product instead of N small ones
    let mut stacked = DMatrix::zeros(t, n * width);
    for i in 0..n {
        stacked.column_mut(i * width).copy_from(&panel.unit_y(i));
        stacked
            .columns_mut(i * width + 1, d)
            .copy_from(panel.unit_x(i));
    }
    let projected = m.apply(&stacked);
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        y.push(projected.column(i * width).clone_owned());
        x.push(projected.columns(i * width + 1, d).clone_owned());
    }
    Projected { y, x }
}

fn residual_matrix(projected: &Projected, beta: &DVector<f64>) -> DMatrix<f64> {
    let n = projected.y.len();
    let t = projected.y.first().map_or(0, |v| v.len());
    let mut eps = DMatrix::zeros(n, t);
    for i in 0..n {
        let e = &projected.y[i] - &projected.x[i] * beta;
        eps.row_mut(i).copy_from(&e.transpose());
    }
    eps
}

/// Pooled estimator `(Σ X_i'M X_i)^{-1} Σ X_i'M y_i` for an arbitrary matrix of
/// projection columns. SCCE and CCEP are this with particular `columns`.
pub fn pooled_estimate(
    panel: &PanelData,
    columns: &DMatrix<f64>,
    method: Method,
) -> Result<EstimationResult> {
    let m = Annihilator::new(columns);
    let projected = project_units(panel, &m);
    let d = panel.n_regressors();
    let mut gram = DMatrix::zeros(d, d);
    let mut raw = DMatrix::zeros(d, d);
    let mut rhs = DMatrix::zeros(d, 1);
    for (i, (x, y)) in projected.x.iter().zip(&projected.y).enumerate() {
        gram += x.tr_mul(x);
        raw += panel.unit_x(i).tr_mul(panel.unit_x(i));
        rhs += x.tr_mul(y);
    }
    let (ok, lo, hi) = design_gate(&gram, &raw);
    let singular = || Error::SingularDesign {
        min_eigenvalue: lo,
        max_eigenvalue: hi,
    };
    if !ok {
        return Err(singular());
    }
    let beta = spd_solve(&gram, &rhs).ok_or_else(singular)?.column(0).clone_owned();
    let eps_hat = residual_matrix(&projected, &beta);
    Ok(EstimationResult {
        beta,
        method,
        eps_hat,
        v_hat: projected.x,
        projection_rank: m.rank(),
        per_unit_betas: None,
    })
}

/// SCCE: pooled estimator with the sieve basis as projection columns.
pub fn scce_estimate(panel: &PanelData, basis: &SieveBasis) -> Result<EstimationResult> {
    if basis.matrix().nrows() != panel.n_periods() {
        return Err(Error::InvalidConfig(format!(
            "basis has {} rows but the panel has {} periods",
            basis.matrix().nrows(),
            panel.n_periods()
        )));
    }
    pooled_estimate(panel, basis.matrix(), Method::Scce)
}

pub fn ccep_estimate(panel: &PanelData) -> Result<EstimationResult> {
    let columns = ccep_columns(&cross_sectional_average(panel));
    pooled_estimate(panel, &columns, Method::Ccep)
}

/// Mean group: unit-by-unit regressions on the `[1, F]`-annihilated data, averaged.
/// Residuals are formed with the averaged coefficient.
pub fn ccemg_estimate(panel: &PanelData) -> Result<EstimationResult> {
    let columns = ccep_columns(&cross_sectional_average(panel));
    let m = Annihilator::new(&columns);
    let projected = project_units(panel, &m);
    let (n, d) = (panel.n_units(), panel.n_regressors());
    let mut per_unit = DMatrix::zeros(n, d);
    for i in 0..n {
        let x = &projected.x[i];
        let gram = x.tr_mul(x);
        let rhs = x.tr_mul(&projected.y[i]);
        let singular = || Error::SingularUnit {
            unit: i,
            label: panel.unit_labels()[i].clone(),
        };
        let raw = panel.unit_x(i).tr_mul(panel.unit_x(i));
        let (ok, _, _) = design_gate(&gram, &raw);
        if !ok {
            return Err(singular());
        }
        let rhs = DMatrix::from_column_slice(d, 1, rhs.as_slice());
        let b = spd_solve(&gram, &rhs).ok_or_else(singular)?;
        per_unit.row_mut(i).copy_from(&b.transpose());
    }
    let beta = DVector::from_fn(d, |k, _| {
        per_unit.column(k).iter().copied().sum::<f64>() / n as f64
    });
    let eps_hat = residual_matrix(&projected, &beta);
    Ok(EstimationResult {
        beta,
        method: Method::Ccemg,
        eps_hat,
        v_hat: projected.x,
        projection_rank: m.rank(),
        per_unit_betas: Some(per_unit),
    })
}

/// Runs `method` on `panel`, building the sieve basis from `sieve` when needed.
pub fn estimate(panel: &PanelData, method: Method, sieve: &SieveConfig) -> Result<EstimationResult> {
    match method {
        Method::Scce => {
            let basis = sieve.build(&cross_sectional_average(panel));
            scce_estimate(panel, &basis)
        }
        Method::Ccep => ccep_estimate(panel),
        Method::Ccemg => ccemg_estimate(panel),
    }
}
