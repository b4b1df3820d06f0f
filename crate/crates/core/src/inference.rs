//! Covariance estimation, bootstrap intervals and specification tests.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::estimators::{ccep_columns, ccep_estimate, estimate, EstimationResult, Method};
use crate::linalg::{ols, passes_eigen_gate, spd_inverse, symmetrize, Annihilator};
use crate::panel::{cross_sectional_average, PanelData};
use crate::sieve::{SieveBasis, SieveConfig};
use crate::simulate::{stream_rng, DOMAIN_BOOTSTRAP};
use crate::stats::{floor_root, quantile_sorted, sorted_copy};

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub sigma_v: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    pub sandwich: DMatrix<f64>,
    pub std_errors: DVector<f64>,
    pub hac_window: usize,
}

/// `Σ_v = (1/NT) Σ_i V_i'V_i`.
pub fn sigma_v_hat(result: &EstimationResult) -> DMatrix<f64> {
    let (n, t, d) = (result.n_units(), result.n_periods(), result.n_regressors());
    let mut acc = DMatrix::zeros(d, d);
    for v in &result.v_hat {
        acc += v.tr_mul(v);
    }
    symmetrize(&(acc / (n * t) as f64))
}

/// Cube-root rule `⌊T^{1/3}⌋`.
pub fn default_hac_window(t_periods: usize) -> usize {
    floor_root(t_periods, 3)
}

/// Bartlett-kernel long-run covariance of the scores `ε_it v_it`:
/// `Θ = Θ_0 + Σ_{l=1..L} (1 - l/(L+1)) (Θ_l + Θ_l')` with
/// `Θ_l = (1/NT) Σ_i Σ_{t>l} ε_it ε_i,t-l v_it v_i,t-l'`.
pub fn hac_theta(result: &EstimationResult, window: usize) -> Result<DMatrix<f64>> {
    let (n, t, d) = (result.n_units(), result.n_periods(), result.n_regressors());
    if window >= t {
        return Err(Error::WindowTooLarge {
            window,
            periods: t,
        });
    }
    let mut theta = DMatrix::zeros(d, d);
    for i in 0..n {
        // scores u_t = ε_it v_it as rows of a T x d matrix
        let mut u = result.v_hat[i].clone();
        for (s, mut row) in u.row_iter_mut().enumerate() {
            row *= result.eps_hat[(i, s)];
        }
        theta += u.tr_mul(&u);
        for l in 1..=window {
            let w = 1.0 - l as f64 / (window + 1) as f64;
            let lead = u.rows(l, t - l);
            let lag = u.rows(0, t - l);
            let gamma = lead.tr_mul(&lag);
            theta += (&gamma + gamma.transpose()) * w;
        }
    }
    Ok(symmetrize(&(theta / (n * t) as f64)))
}

/// `Σ_v^{-1} Θ Σ_v^{-1}` with standard errors `sqrt(diag / n_obs)`, where
/// `n_obs = N T`.
pub fn sandwich_covariance(
    sigma_v: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    n_obs: usize,
    hac_window: usize,
) -> Result<CovarianceEstimate> {
    let (ok, _, _) = passes_eigen_gate(sigma_v);
    if !ok {
        return Err(Error::SingularSigmaV);
    }
    let inv = spd_inverse(sigma_v).ok_or(Error::SingularSigmaV)?;
    let sandwich = symmetrize(&(&inv * theta * &inv));
    let std_errors = DVector::from_fn(sandwich.nrows(), |k, _| {
        (sandwich[(k, k)].max(0.0) / n_obs as f64).sqrt()
    });
    Ok(CovarianceEstimate {
        sigma_v: sigma_v.clone(),
        theta: theta.clone(),
        sandwich,
        std_errors,
        hac_window,
    })
}

/// HAC sandwich for a fitted model; `window = None` uses [`default_hac_window`].
pub fn covariance(result: &EstimationResult, window: Option<usize>) -> Result<CovarianceEstimate> {
    let t = result.n_periods();
    let window = window.unwrap_or_else(|| default_hac_window(t));
    let theta = hac_theta(result, window)?;
    sandwich_covariance(
        &sigma_v_hat(result),
        &theta,
        result.n_units() * t,
        window,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub method: Method,
    pub sieve: SieveConfig,
    pub replications: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            method: Method::Scce,
            sieve: SieveConfig::default(),
            replications: 399,
            level: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// Successful replications in replication order, one row each.
    pub draws: DMatrix<f64>,
    pub ci_lower: DVector<f64>,
    pub ci_upper: DVector<f64>,
    pub level: f64,
    pub seed: u64,
    pub replications: usize,
    pub skipped: usize,
}

/// Percentile interval `[q((1-level)/2), q(1-(1-level)/2)]` of `draws`.
pub fn percentile_interval(draws: &[f64], level: f64) -> (f64, f64) {
    let sorted = sorted_copy(draws);
    let tail = (1.0 - level) / 2.0;
    (
        quantile_sorted(&sorted, tail),
        quantile_sorted(&sorted, 1.0 - tail),
    )
}

/// Pair bootstrap over units.
///
/// Replication `b` draws `N` unit indices with replacement from the stream
/// `(seed, b)`, rebuilds the proxy and sieve basis from the resampled panel, and
/// re-estimates. Replications that fail numerically are skipped; more than 1%
/// skipped is an error.
pub fn bootstrap_ci(panel: &PanelData, config: &BootstrapConfig) -> Result<BootstrapResult> {
    if config.replications < 2 {
        return Err(Error::InvalidConfig("bootstrap needs at least 2 replications".into()));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must lie in (0, 1), got {}",
            config.level
        )));
    }
    let n = panel.n_units();
    let d = panel.n_regressors();
    let outcomes: Vec<Result<Option<DVector<f64>>>> = (0..config.replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(config.seed, DOMAIN_BOOTSTRAP, 0, b as u64);
            let idx: Vec<usize> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0..n)).collect();
            let sample = panel.resample_units(&idx);
            match estimate(&sample, config.method, &config.sieve) {
                Ok(fit) => Ok(Some(fit.beta)),
                Err(e) if e.is_numerical() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(config.replications);
    for outcome in outcomes {
        if let Some(beta) = outcome? {
            rows.push(beta);
        }
    }
    let skipped = config.replications - rows.len();
    if skipped * 100 > config.replications || rows.is_empty() {
        return Err(Error::TooManySkipped {
            skipped,
            total: config.replications,
        });
    }
    let draws = DMatrix::from_fn(rows.len(), d, |b, k| rows[b][k]);
    let mut ci_lower = DVector::zeros(d);
    let mut ci_upper = DVector::zeros(d);
    for k in 0..d {
        let col: Vec<f64> = draws.column(k).iter().copied().collect();
        let (lo, hi) = percentile_interval(&col, config.level);
        ci_lower[k] = lo;
        ci_upper[k] = hi;
    }
    Ok(BootstrapResult {
        draws,
        ci_lower,
        ci_upper,
        level: config.level,
        seed: config.seed,
        replications: config.replications,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub decision_at_5pct: bool,
    /// Lag order chosen by the ADF regression; absent for other tests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag: Option<usize>,
}

/// Test that the nonlinear sieve terms are jointly irrelevant once the linear
/// proxy `[1, F]` has been partialled out.
///
/// Under the null the model is estimated by CCEP, giving residuals `u_i`. For every
/// unit, an F statistic compares the fit of `u_i` on the nonlinear columns
/// (after projecting them off `[1, F]`) against the unexplained remainder:
/// `F_i = (‖P_Q u_i‖² / q) / (‖M u_i‖² / ν)` with `q` the rank those columns add
/// and `ν = T - rank(P)`. The unit p-values are combined by Fisher's method,
/// `-2 Σ ln p_i ~ χ²(2N)`. A pooled score would vanish identically here: the
/// residuals sum to the annihilated outcome average, which lies in the proxy span.
pub fn linearity_test(panel: &PanelData, basis: &SieveBasis) -> Result<TestResult> {
    let nonlinear = basis.nonlinear_columns();
    if nonlinear.ncols() == 0 {
        return Err(Error::NoNonlinearColumns);
    }
    let t = panel.n_periods();
    if basis.matrix().nrows() != t {
        return Err(Error::InvalidConfig("basis rows differ from panel periods".into()));
    }
    let restricted = ccep_columns(&cross_sectional_average(panel));
    let mut full = DMatrix::zeros(t, restricted.ncols() + nonlinear.ncols());
    full.columns_mut(0, restricted.ncols()).copy_from(&restricted);
    full.columns_mut(restricted.ncols(), nonlinear.ncols()).copy_from(&nonlinear);
    let rank_restricted = Annihilator::new(&restricted).rank();
    let m_full = Annihilator::new(&full);
    let q = m_full.rank().saturating_sub(rank_restricted);
    if q == 0 {
        return Err(Error::DegenerateRegression(
            "nonlinear columns add nothing to the span of the proxy".into(),
        ));
    }
    if m_full.rank() >= t {
        return Err(Error::InsufficientDegreesOfFreedom(format!(
            "sieve span has rank {} with only {t} periods",
            m_full.rank()
        )));
    }
    let nu = t - m_full.rank();
    let fit = ccep_estimate(panel)?;
    let f_dist = FisherSnedecor::new(q as f64, nu as f64).expect("positive degrees of freedom");
    let mut statistic = 0.0;
    for i in 0..panel.n_units() {
        let u = fit.eps_hat.row(i).transpose();
        let projected_y = &u + &fit.v_hat[i] * &fit.beta;
        // residuals at round-off level carry no information
        let p = if u.norm() <= 1e-10 * projected_y.norm() {
            1.0
        } else {
            let rss_restricted = u.norm_squared();
            let rss_full = m_full.apply_vector(&u).norm_squared();
            let explained = (rss_restricted - rss_full).max(0.0);
            if rss_full == 0.0 {
                if explained == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                f_dist.sf((explained / q as f64) / (rss_full / nu as f64))
            }
        };
        statistic += -2.0 * p.max(f64::MIN_POSITIVE).ln();
    }
    let dof = 2 * panel.n_units();
    let p_value = ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
        .clamp(0.0, 1.0);
    Ok(TestResult {
        statistic,
        dof,
        p_value,
        decision_at_5pct: p_value < 0.05,
        lag: None,
    })
}

/// Asymptotic critical values for the constant-only ADF regression at 1%, 5%, 10%.
pub const ADF_CRITICAL_VALUES: [(f64, f64); 3] = [(-3.43, 0.01), (-2.86, 0.05), (-2.57, 0.10)];

/// Piecewise-linear p-value through [`ADF_CRITICAL_VALUES`], extended with the
/// slope of the nearest segment and clamped to `[0, 1]`.
pub fn adf_p_value(statistic: f64) -> f64 {
    let [(x0, p0), (x1, p1), (x2, p2)] = ADF_CRITICAL_VALUES;
    let p = if statistic <= x1 {
        p0 + (statistic - x0) * (p1 - p0) / (x1 - x0)
    } else {
        p1 + (statistic - x1) * (p2 - p1) / (x2 - x1)
    };
    p.clamp(0.0, 1.0)
}

/// `⌊12 (T/100)^{1/4}⌋`.
pub fn default_adf_max_lag(len: usize) -> usize {
    (12.0 * (len as f64 / 100.0).powf(0.25)).floor() as usize
}

fn adf_design(series: &[f64], lag: usize, first: usize) -> (DMatrix<f64>, DVector<f64>) {
    let diff: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (first..diff.len()).collect();
    let z = DMatrix::from_fn(rows.len(), 2 + lag, |r, c| {
        let j = rows[r];
        match c {
            0 => 1.0,
            1 => series[j],
            _ => diff[j - (c - 1)],
        }
    });
    let y = DVector::from_fn(rows.len(), |r, _| diff[rows[r]]);
    (z, y)
}

/// Augmented Dickey-Fuller test with a constant.
///
/// Fits `Δs_t = α + ρ s_{t-1} + Σ_{l=1..p} φ_l Δs_{t-l} + e_t` for `p = 0..=p_max`
/// on the common sample that the largest lag allows, picks `p` by BIC, refits on
/// all available observations and reports the t-ratio of `ρ`.
pub fn adf_test(series: &[f64], max_lag: Option<usize>) -> Result<TestResult> {
    let len = series.len();
    if len < 10 {
        return Err(Error::SeriesTooShort { len, min: 10 });
    }
    // keep at least three residual degrees of freedom at the largest lag
    let feasible = (len - 6) / 2;
    let p_max = match max_lag {
        Some(p) if p > feasible => {
            return Err(Error::SeriesTooShort {
                len,
                min: 2 * p + 6,
            })
        }
        Some(p) => p,
        None => default_adf_max_lag(len).min(feasible),
    };
    let mut best: Option<(f64, usize)> = None;
    for p in 0..=p_max {
        let (z, y) = adf_design(series, p, p_max);
        let fit = ols(&z, &y)?;
        let n = y.len() as f64;
        let bic = n * (fit.rss / n).ln() + z.ncols() as f64 * n.ln();
        if best.is_none_or(|(b, _)| bic < b) {
            best = Some((bic, p));
        }
    }
    let lag = best.map(|(_, p)| p).unwrap_or(0);
    let (z, y) = adf_design(series, lag, lag);
    let fit = ols(&z, &y)?;
    let se = fit.std_error(1);
    if !(se.is_finite() && se > 0.0) {
        return Err(Error::DegenerateRegression("zero residual variance".into()));
    }
    let statistic = fit.coef[1] / se;
    Ok(TestResult {
        statistic,
        dof: y.len() - z.ncols(),
        p_value: adf_p_value(statistic),
        decision_at_5pct: statistic < ADF_CRITICAL_VALUES[1].0,
        lag: Some(lag),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{generate, Dgp, DgpConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn fake_result(eps: DMatrix<f64>, v: Vec<DMatrix<f64>>) -> EstimationResult {
        let d = v[0].ncols();
        EstimationResult {
            beta: DVector::zeros(d),
            method: Method::Ccep,
            eps_hat: eps,
            v_hat: v,
            projection_rank: 0,
            per_unit_betas: None,
        }
    }

    fn random_result(n: usize, t: usize, d: usize, seed: u64) -> EstimationResult {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = DMatrix::from_fn(n, t, |_, _| rng.sample(StandardNormal));
        let v = (0..n)
            .map(|_| DMatrix::from_fn(t, d, |_, _| rng.sample(StandardNormal)))
            .collect();
        fake_result(eps, v)
    }

    #[test]
    fn sigma_v_hand_value() {
        let r = fake_result(DMatrix::zeros(1, 2), vec![DMatrix::from_column_slice(2, 1, &[1.0, 3.0])]);
        assert_eq!(sigma_v_hat(&r)[(0, 0)], 5.0);
        let z = fake_result(DMatrix::zeros(2, 3), vec![DMatrix::zeros(3, 2); 2]);
        assert_eq!(sigma_v_hat(&z), DMatrix::zeros(2, 2));
    }

    #[test]
    fn sigma_v_matches_double_loop() {
        let r = random_result(4, 9, 2, 1);
        let mut want = DMatrix::zeros(2, 2);
        for i in 0..4 {
            for s in 0..9 {
                for a in 0..2 {
                    for b in 0..2 {
                        want[(a, b)] += r.v_hat[i][(s, a)] * r.v_hat[i][(s, b)] / 36.0;
                    }
                }
            }
        }
        assert!((sigma_v_hat(&r) - want).norm() <= 1e-12);
    }

    #[test]
    fn hac_hand_value() {
        let r = fake_result(
            DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]),
            vec![DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0])],
        );
        assert!((hac_theta(&r, 1).unwrap()[(0, 0)] - 22.0 / 3.0).abs() <= 1e-12);
        assert!((hac_theta(&r, 0).unwrap()[(0, 0)] - 14.0 / 3.0).abs() <= 1e-12);
        assert!(matches!(hac_theta(&r, 3), Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn hac_zero_residuals() {
        let mut r = random_result(3, 10, 2, 2);
        r.eps_hat.fill(0.0);
        assert_eq!(hac_theta(&r, 2).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn hac_increment_is_weighted_autocovariance() {
        let r = random_result(3, 12, 2, 3);
        for window in 1..5 {
            let step = hac_theta(&r, window).unwrap() - hac_theta(&r, window - 1).unwrap();
            // rebuild the same difference term by term
            let mut want = DMatrix::zeros(2, 2);
            let w = |l: usize, big: usize| 1.0 - l as f64 / (big + 1) as f64;
            for l in 1..=window {
                let dw = w(l, window) - if l < window { w(l, window - 1) } else { 0.0 };
                for i in 0..3 {
                    for s in l..12 {
                        let a = r.v_hat[i].row(s) * r.eps_hat[(i, s)];
                        let b = r.v_hat[i].row(s - l) * r.eps_hat[(i, s - l)];
                        let g = a.transpose() * b;
                        want += (&g + g.transpose()) * dw / 36.0;
                    }
                }
            }
            assert!((step - want).norm() <= 1e-12);
        }
    }

    #[test]
    fn sandwich_cancellations() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let c = sandwich_covariance(&s, &s, 10, 1).unwrap();
        let inv = s.clone().try_inverse().unwrap();
        assert!((c.sandwich - &inv).norm() <= 1e-12);
        let id = DMatrix::identity(2, 2);
        let c = sandwich_covariance(&id, &s, 4, 0).unwrap();
        assert!((&c.sandwich - &s).norm() <= 1e-12);
        assert!((c.std_errors[0] - (2.0f64 / 4.0).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn sandwich_matches_closed_form_two_by_two() {
        let s = DMatrix::from_row_slice(2, 2, &[1.7, -0.3, -0.3, 0.9]);
        let th = DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.2, 1.1]);
        let det = 1.7 * 0.9 - 0.09;
        let inv = DMatrix::from_row_slice(2, 2, &[0.9 / det, 0.3 / det, 0.3 / det, 1.7 / det]);
        let want = &inv * &th * &inv;
        let got = sandwich_covariance(&s, &th, 100, 2).unwrap();
        assert!((got.sandwich - want).norm() <= 1e-12);
        assert!(matches!(
            sandwich_covariance(&DMatrix::zeros(2, 2), &th, 1, 0),
            Err(Error::SingularSigmaV)
        ));
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let sim = generate(&DgpConfig::new(Dgp::E1, 30, 30, 4)).unwrap();
        let fit = estimate(&sim.panel, Method::Scce, &SieveConfig::default()).unwrap();
        let c = covariance(&fit, None).unwrap();
        assert_eq!(c.hac_window, 3);
        for m in [&c.sigma_v, &c.theta, &c.sandwich] {
            assert!((m - m.transpose()).norm() <= 1e-12 * m.norm());
        }
        let (lo, hi) = crate::linalg::eigen_range(&c.sandwich);
        assert!(lo >= -1e-10 * hi);
        for k in 0..2 {
            assert!((c.std_errors[k] - (c.sandwich[(k, k)] / 900.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn percentile_hand_value() {
        assert_eq!(percentile_interval(&[1.0, 2.0, 3.0, 4.0], 0.5), (1.75, 3.25));
        assert_eq!(percentile_interval(&[2.0; 7], 0.95), (2.0, 2.0));
    }

    #[test]
    fn single_unit_bootstrap_cannot_identify_slopes() {
        let sim = generate(&DgpConfig::new(Dgp::E1, 1, 20, 1)).unwrap();
        let cfg = BootstrapConfig {
            replications: 10,
            ..BootstrapConfig::default()
        };
        for method in [Method::Scce, Method::Ccep, Method::Ccemg] {
            let r = bootstrap_ci(&sim.panel, &BootstrapConfig { method, ..cfg });
            assert!(matches!(r, Err(Error::TooManySkipped { skipped: 10, total: 10 })));
        }
    }

    #[test]
    fn bootstrap_reproducible_across_thread_counts() {
        let sim = generate(&DgpConfig::new(Dgp::E1, 25, 25, 5)).unwrap();
        let cfg = BootstrapConfig {
            replications: 40,
            seed: 11,
            ..BootstrapConfig::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| bootstrap_ci(&sim.panel, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one.draws.nrows(), 40);
        assert!(one.ci_lower.iter().zip(one.ci_upper.iter()).all(|(l, u)| l <= u));
    }

    #[test]
    fn bootstrap_rejects_bad_config() {
        let sim = generate(&DgpConfig::new(Dgp::E1, 10, 20, 1)).unwrap();
        let bad_b = BootstrapConfig {
            replications: 1,
            ..BootstrapConfig::default()
        };
        let bad_level = BootstrapConfig {
            level: 1.0,
            ..BootstrapConfig::default()
        };
        assert!(matches!(bootstrap_ci(&sim.panel, &bad_b), Err(Error::InvalidConfig(_))));
        assert!(matches!(bootstrap_ci(&sim.panel, &bad_level), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn linearity_degenerate_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 8;
        let xs: Vec<DMatrix<f64>> = (0..n)
            .map(|_| DMatrix::from_fn(30, 2, |_, _| rng.sample(StandardNormal)))
            .collect();
        let y = DMatrix::from_fn(n, 30, |i, s| xs[i][(s, 0)] + xs[i][(s, 1)]);
        let panel = PanelData::new(
            (0..n).map(|i| i.to_string()).collect(),
            (1..=30).collect(),
            y,
            xs,
        )
        .unwrap();
        let basis = SieveConfig::default().build(&cross_sectional_average(&panel));
        let r = linearity_test(&panel, &basis).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.decision_at_5pct);
        assert_eq!(r.dof, 16);
    }

    #[test]
    fn linearity_needs_nonlinear_columns() {
        let sim = generate(&DgpConfig::new(Dgp::E1, 10, 20, 1)).unwrap();
        let proxy = cross_sectional_average(&sim.panel);
        let family = crate::sieve::BasisFamily::new(crate::sieve::BasisKind::PowerSeries, 1).unwrap();
        let basis = crate::sieve::build_sieve_matrix(&proxy, family, 0);
        assert!(matches!(
            linearity_test(&sim.panel, &basis),
            Err(Error::NoNonlinearColumns)
        ));
    }

    #[test]
    fn linearity_invariant_to_nonlinear_scaling() {
        let sim = generate(&DgpConfig::new(Dgp::E1, 20, 40, 7)).unwrap();
        let proxy = cross_sectional_average(&sim.panel);
        let basis = SieveConfig::default().build(&proxy);
        let base = linearity_test(&sim.panel, &basis).unwrap();
        let r = linearity_test(&sim.panel, &basis.with_nonlinear_scaled(37.5)).unwrap();
        assert!((r.statistic - base.statistic).abs() <= 1e-8 * base.statistic.abs().max(1.0));
    }

    #[test]
    fn adf_p_value_interpolates() {
        assert!((adf_p_value(-2.86) - 0.05).abs() < 1e-12);
        assert!((adf_p_value(-3.43) - 0.01).abs() < 1e-12);
        assert!((adf_p_value(-2.57) - 0.10).abs() < 1e-12);
        assert_eq!(adf_p_value(-10.0), 0.0);
        assert_eq!(adf_p_value(5.0), 1.0);
        assert!(adf_p_value(-3.0) > 0.01 && adf_p_value(-3.0) < 0.05);
    }

    #[test]
    fn adf_default_lag_rule() {
        assert_eq!(default_adf_max_lag(100), 12);
        assert_eq!(default_adf_max_lag(200), 14);
    }

    #[test]
    fn adf_separates_random_walk_from_noise() {
        let mut walk_keep = 0;
        let mut noise_reject = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let noise: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
            let walk: Vec<f64> = noise
                .iter()
                .scan(0.0, |acc, e| {
                    *acc += e;
                    Some(*acc)
                })
                .collect();
            if adf_test(&walk, None).unwrap().statistic > -2.86 {
                walk_keep += 1;
            }
            if adf_test(&noise, None).unwrap().statistic < -2.86 {
                noise_reject += 1;
            }
        }
        assert!(walk_keep >= 90, "random walk kept in {walk_keep}/100");
        assert!(noise_reject >= 90, "white noise rejected in {noise_reject}/100");
    }

    #[test]
    fn adf_degenerate_inputs() {
        assert!(matches!(adf_test(&[5.0; 50], None), Err(Error::DegenerateRegression(_))));
        assert!(matches!(adf_test(&[1.0; 9], None), Err(Error::SeriesTooShort { .. })));
        let s: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64).collect();
        assert!(matches!(adf_test(&s, Some(30)), Err(Error::SeriesTooShort { .. })));
        assert!(adf_test(&s, Some(2)).unwrap().lag.unwrap() <= 2);
    }
}
