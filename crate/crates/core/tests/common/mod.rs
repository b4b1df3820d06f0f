//! Dense reference implementations used as test oracles. They share no code with
//! the library's projection or solve paths.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use scce_core::PanelData;

/// `I - A pinv(A'A) A'` as an explicit `T x T` matrix, written as `I - Q_r Q_r'`
/// with `Q_r` the leading columns of a column-pivoted QR of `A`. Forming
/// `pinv(A'A)` literally would square the condition number of the sieve basis.
/// Columns are scaled to unit length first, which leaves the projection unchanged.
/// A pivot counts toward the rank when `|R_jj|^2 > max(T, K) eps |R_00|^2`, the
/// same cutoff as the pseudo-inverse of `A'A`.
pub fn dense_annihilator(a: &DMatrix<f64>) -> DMatrix<f64> {
    let t = a.nrows();
    let mut scaled = a.clone();
    for mut c in scaled.column_iter_mut() {
        let norm = c.norm();
        if norm > 0.0 {
            c /= norm;
        }
    }
    let qr = scaled.col_piv_qr();
    let r = qr.r();
    let lead = r[(0, 0)].abs();
    let rtol = t.max(a.ncols()) as f64 * f64::EPSILON;
    let rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&j| r[(j, j)].powi(2) > rtol * lead * lead)
        .count();
    let q = qr.q();
    let basis = q.columns(0, rank);
    DMatrix::identity(t, t) - basis * basis.transpose()
}

/// `(Σ X_i'M X_i)^{-1} Σ X_i'M y_i` with `M` dense.
pub fn dense_pooled_beta(panel: &PanelData, columns: &DMatrix<f64>) -> DVector<f64> {
    let m = dense_annihilator(columns);
    let d = panel.n_regressors();
    let mut gram = DMatrix::zeros(d, d);
    let mut rhs = DVector::zeros(d);
    for i in 0..panel.n_units() {
        let x = panel.unit_x(i);
        let y = panel.unit_y(i);
        gram += x.transpose() * &m * x;
        rhs += x.transpose() * &m * y;
    }
    gram.try_inverse().expect("invertible oracle Gram") * rhs
}

/// Per-unit OLS of `y_i` on `[X_i, extra]`, keeping the `X_i` coefficients.
pub fn unit_ols_slopes(panel: &PanelData, i: usize, extra: &DMatrix<f64>) -> DVector<f64> {
    let x = panel.unit_x(i);
    let (t, d) = x.shape();
    let mut z = DMatrix::zeros(t, d + extra.ncols());
    z.columns_mut(0, d).copy_from(x);
    z.columns_mut(d, extra.ncols()).copy_from(extra);
    let coef = z
        .svd(true, true)
        .solve(&panel.unit_y(i), 1e-14)
        .expect("svd solve");
    coef.rows(0, d).clone_owned()
}

/// `[1, averages]` computed with plain loops.
pub fn naive_proxy_columns(panel: &PanelData) -> DMatrix<f64> {
    let (n, t, d) = (panel.n_units(), panel.n_periods(), panel.n_regressors());
    let mut a = DMatrix::from_element(t, d + 2, 1.0);
    for s in 0..t {
        a[(s, 1)] = (0..n).map(|i| panel.y()[(i, s)]).sum::<f64>() / n as f64;
        for k in 0..d {
            a[(s, k + 2)] = (0..n).map(|i| panel.unit_x(i)[(s, k)]).sum::<f64>() / n as f64;
        }
    }
    a
}
