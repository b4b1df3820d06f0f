//! Projections and small dense solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Residual maker `M_A = I - A (A'A)^+ A'` for a fixed `T x K` matrix `A`.
///
/// Stored as an orthonormal basis `U_r` of the column span, so applying it costs
/// `O(T r m)` for an `m`-column target and the `T x T` matrix is never formed.
/// Columns are scaled to unit norm before the decomposition; the span does not
/// change but badly scaled polynomial columns stop dominating the spectrum. A
/// direction is kept when its squared singular value exceeds
/// `max(T, K) * eps * sigma_max^2`, the pseudo-inverse cutoff for `A'A`.
#[derive(Debug, Clone)]
pub struct Annihilator {
    basis: DMatrix<f64>,
    n_rows: usize,
}

impl Annihilator {
    pub fn new(columns: &DMatrix<f64>) -> Self {
        let (t, k) = columns.shape();
        let nonzero: Vec<usize> = (0..k).filter(|&c| columns.column(c).norm() > 0.0).collect();
        if t == 0 || nonzero.is_empty() {
            return Self {
                basis: DMatrix::zeros(t, 0),
                n_rows: t,
            };
        }
        let mut scaled = columns.select_columns(nonzero.iter());
        for mut col in scaled.column_iter_mut() {
            let norm = col.norm();
            col /= norm;
        }
        let svd = scaled.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let sigma = &svd.singular_values;
        let sigma_max = sigma.max();
        let rtol = t.max(k) as f64 * f64::EPSILON;
        let keep: Vec<usize> = (0..sigma.len())
            .filter(|&i| sigma[i] * sigma[i] > rtol * sigma_max * sigma_max)
            .collect();
        Self {
            basis: u.select_columns(keep.iter()),
            n_rows: t,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Orthonormal basis of the column span (`T x rank`).
    pub fn span_basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `M_A * target`.
    pub fn apply(&self, target: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(target.nrows(), self.n_rows, "row mismatch in annihilator");
        if self.rank() == 0 {
            return target.clone();
        }
        let coef = self.basis.tr_mul(target);
        target - &self.basis * coef
    }

    pub fn apply_vector(&self, target: &DVector<f64>) -> DVector<f64> {
        assert_eq!(target.len(), self.n_rows, "row mismatch in annihilator");
        if self.rank() == 0 {
            return target.clone();
        }
        let coef = self.basis.tr_mul(target);
        target - &self.basis * coef
    }
}

/// `M_A * target` together with `rank(A)`.
pub fn annihilate(columns: &DMatrix<f64>, target: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let m = Annihilator::new(columns);
    (m.apply(target), m.rank())
}

/// Extreme eigenvalues of a symmetric matrix, `(min, max)`.
pub fn eigen_range(sym: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(sym.clone());
    (eig.eigenvalues.min(), eig.eigenvalues.max())
}

/// Relative eigenvalue gate used before every small solve: a symmetric matrix
/// passes when its smallest eigenvalue exceeds `1e-10` times its largest.
pub fn passes_eigen_gate(sym: &DMatrix<f64>) -> (bool, f64, f64) {
    let (lo, hi) = eigen_range(sym);
    let ok = hi > 0.0 && hi.is_finite() && lo > 1e-10 * hi;
    (ok, lo, hi)
}

/// Solves `gram * b = rhs` for a symmetric positive definite `gram` that has
/// already passed [`passes_eigen_gate`]. Returns `None` if Cholesky still fails.
pub fn spd_solve(gram: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    gram.clone().cholesky().map(|c| c.solve(rhs))
}

pub fn spd_inverse(gram: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    gram.clone().cholesky().map(|c| c.inverse())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Ordinary least squares fit.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: DVector<f64>,
    pub rss: f64,
    pub n_obs: usize,
    /// `(Z'Z)^{-1}`
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    /// Conventional standard error of coefficient `k`, with `n - p` degrees of freedom.
    pub fn std_error(&self, k: usize) -> f64 {
        let dof = (self.n_obs - self.coef.len()) as f64;
        (self.rss / dof * self.xtx_inv[(k, k)]).sqrt()
    }
}

/// OLS of `y` on `z`. Fails on rank-deficient designs or when no residual degrees
/// of freedom remain.
pub fn ols(z: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, p) = z.shape();
    if n <= p {
        return Err(Error::DegenerateRegression(format!(
            "{n} observations for {p} coefficients"
        )));
    }
    // scale columns so the gate judges collinearity rather than units
    let scale: Vec<f64> = z.column_iter().map(|c| c.norm()).collect();
    if scale.contains(&0.0) {
        return Err(Error::DegenerateRegression("zero regressor column".into()));
    }
    let zs = DMatrix::from_fn(n, p, |r, c| z[(r, c)] / scale[c]);
    let gram = zs.tr_mul(&zs);
    let (ok, lo, hi) = passes_eigen_gate(&gram);
    if !ok {
        return Err(Error::DegenerateRegression(format!(
            "collinear regressors (eigenvalues {lo:e} .. {hi:e})"
        )));
    }
    let inv_s = spd_inverse(&gram)
        .ok_or_else(|| Error::DegenerateRegression("Cholesky factorization failed".into()))?;
    let coef_s = &inv_s * zs.tr_mul(y);
    let coef = DVector::from_fn(p, |k, _| coef_s[k] / scale[k]);
    let xtx_inv = DMatrix::from_fn(p, p, |a, b| inv_s[(a, b)] / (scale[a] * scale[b]));
    let resid = y - z * &coef;
    Ok(OlsFit {
        coef,
        rss: resid.norm_squared(),
        n_obs: n,
        xtx_inv,
    })
}
