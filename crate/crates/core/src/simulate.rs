//! Data-generating processes with two factors and two regressors.
//!
//! * `E1`: nonlinear factor structure,
//!   `g_i(f) = γ1 f1 + γ2 f1 f2 + (f1 - γ3)^2 / 2` and
//!   `G_si(f) = 0.6 [exp(Γ1s) f1 f2^2 + Γ2s exp(f2)] + 0.4 sin(Γ3s f1 + exp(Γ4s) f1 f2)`.
//! * `E2`: linear, `g_i(f) = γ'f`, `G_si(f) = Γ_s'f`.
//!
//! Then `x_it = G_i(f_t) + v_it` and `y_it = x_it'β + g_i(f_t) + ε_it`.
//!
//! Random numbers come from ChaCha8 streams keyed by `(seed, domain, group)` with
//! the stream id as the last coordinate, so any replication can be regenerated on
//! its own and parallel runs do not depend on scheduling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::PanelData;

pub const DOMAIN_DGP: u64 = 1;
pub const DOMAIN_BOOTSTRAP: u64 = 2;
pub const DOMAIN_MONTE_CARLO: u64 = 3;

/// ChaCha8 generator for key `(seed, domain, group)` on stream `index`.
pub fn stream_rng(seed: u64, domain: u64, group: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&group.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dgp {
    E1,
    E2,
}

impl std::fmt::Display for Dgp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Dgp::E1 => "e1",
            Dgp::E2 => "e2",
        })
    }
}

impl std::str::FromStr for Dgp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e1" => Ok(Dgp::E1),
            "e2" => Ok(Dgp::E2),
            other => Err(Error::InvalidConfig(format!("unknown DGP {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorMode {
    /// `f_t ~ N(0, I_2)` independently over time.
    #[default]
    Stationary,
    /// `f_t = f_{t-1} + w_t`, `w_t ~ N(0, 0.05 I_2)`, `f_0 = 0`.
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    /// `ε_it, v_it ~ N(0, 1)` independently.
    #[default]
    Iid,
    /// Serially and cross-sectionally correlated errors, see
    /// [`correlated_errors_from_innovations`]. Applied to `ε` and to each column of `v`.
    Correlated { pi: f64, l_band: usize },
}

/// Law of the E2 loadings. `Standard` draws every loading from `N(0, 1)`.
/// `ShiftedMeans` adds fixed means `γ̄ = (1, 0)`, `Γ̄_1 = (0, 1)`, `Γ̄_2 = (1, 0)`
/// so that the averaged loading matrix has full rank; it is a diagnostic variant
/// and leaves E1 untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadingLaw {
    #[default]
    Standard,
    ShiftedMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub dgp: Dgp,
    pub n: usize,
    pub t: usize,
    pub beta: Vec<f64>,
    pub factor_mode: FactorMode,
    pub error_mode: ErrorMode,
    pub loading_law: LoadingLaw,
    pub seed: u64,
}

impl DgpConfig {
    /// `β = (1, 1)'`, stationary factors, iid errors.
    pub fn new(dgp: Dgp, n: usize, t: usize, seed: u64) -> Self {
        Self {
            dgp,
            n,
            t,
            beta: vec![1.0, 1.0],
            factor_mode: FactorMode::Stationary,
            error_mode: ErrorMode::Iid,
            loading_law: LoadingLaw::Standard,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.t < 2 {
            return Err(Error::InvalidConfig(format!(
                "need n >= 1 and t >= 2, got n={} t={}",
                self.n, self.t
            )));
        }
        if self.beta.len() != 2 || self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidConfig(
                "beta must hold two finite values".into(),
            ));
        }
        if let ErrorMode::Correlated { pi, .. } = self.error_mode {
            if !(0.0..1.0).contains(&pi) {
                return Err(Error::InvalidConfig(format!("pi must lie in [0, 1), got {pi}")));
            }
        }
        Ok(())
    }
}

/// Unit-level loadings. E2 uses only the first two entries of each array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loadings {
    pub outcome: [f64; 3],
    pub regressors: [[f64; 4]; 2],
}

impl Loadings {
    fn draw<R: Rng + ?Sized>(rng: &mut R, dgp: Dgp, law: LoadingLaw) -> Self {
        let mut z = || rng.sample::<f64, _>(StandardNormal);
        match dgp {
            Dgp::E1 => {
                let outcome = [z(), z(), z()];
                let mut regressors = [[0.0; 4]; 2];
                for block in &mut regressors {
                    *block = [z(), z(), 1.0 + z(), 1.0 + z()];
                }
                Self {
                    outcome,
                    regressors,
                }
            }
            Dgp::E2 => {
                let (mo, m1, m2) = match law {
                    LoadingLaw::Standard => ([0.0; 2], [0.0; 2], [0.0; 2]),
                    LoadingLaw::ShiftedMeans => ([1.0, 0.0], [0.0, 1.0], [1.0, 0.0]),
                };
                Self {
                    outcome: [mo[0] + z(), mo[1] + z(), 0.0],
                    regressors: [
                        [m1[0] + z(), m1[1] + z(), 0.0, 0.0],
                        [m2[0] + z(), m2[1] + z(), 0.0, 0.0],
                    ],
                }
            }
        }
    }
}

pub fn e1_outcome_factor(f: [f64; 2], load: &[f64; 3]) -> f64 {
    let [f1, f2] = f;
    load[0] * f1 + load[1] * f1 * f2 + 0.5 * (f1 - load[2]).powi(2)
}

pub fn e1_regressor_factor(f: [f64; 2], load: &[f64; 4]) -> f64 {
    let [f1, f2] = f;
    0.6 * (load[0].exp() * f1 * f2 * f2 + load[1] * f2.exp())
        + 0.4 * (load[2] * f1 + load[3].exp() * f1 * f2).sin()
}

fn linear_factor(f: [f64; 2], load: &[f64]) -> f64 {
    load[0] * f[0] + load[1] * f[1]
}

/// Known pieces behind a simulated panel.
#[derive(Debug, Clone)]
pub struct Truth {
    pub beta: Vec<f64>,
    /// `T x 2`
    pub factors: DMatrix<f64>,
    pub loadings: Vec<Loadings>,
    /// `g_i(f_t)`, `N x T`
    pub factor_component_y: DMatrix<f64>,
    /// `G_i(f_t)`, one `T x 2` block per unit
    pub factor_component_x: Vec<DMatrix<f64>>,
    /// `N x T`
    pub eps: DMatrix<f64>,
    /// One `T x 2` block per unit
    pub v: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct SimulatedPanel {
    pub panel: PanelData,
    pub truth: Truth,
}

/// Builds a panel from explicit factors, loadings and errors.
pub fn assemble(
    dgp: Dgp,
    beta: &[f64],
    factors: DMatrix<f64>,
    loadings: Vec<Loadings>,
    eps: DMatrix<f64>,
    v: Vec<DMatrix<f64>>,
) -> Result<SimulatedPanel> {
    let n = loadings.len();
    let t = factors.nrows();
    if factors.ncols() != 2 || beta.len() != 2 {
        return Err(Error::InvalidConfig("two factors and two slopes required".into()));
    }
    if eps.shape() != (n, t) || v.len() != n || v.iter().any(|b| b.shape() != (t, 2)) {
        return Err(Error::InvalidConfig("error arrays do not match N x T x 2".into()));
    }
    let mut gy = DMatrix::zeros(n, t);
    let mut gx = Vec::with_capacity(n);
    let mut y = DMatrix::zeros(n, t);
    let mut xs = Vec::with_capacity(n);
    for (i, load) in loadings.iter().enumerate() {
        let mut gxi = DMatrix::zeros(t, 2);
        let mut xi = DMatrix::zeros(t, 2);
        for s in 0..t {
            let f = [factors[(s, 0)], factors[(s, 1)]];
            gy[(i, s)] = match dgp {
                Dgp::E1 => e1_outcome_factor(f, &load.outcome),
                Dgp::E2 => linear_factor(f, &load.outcome),
            };
            for r in 0..2 {
                gxi[(s, r)] = match dgp {
                    Dgp::E1 => e1_regressor_factor(f, &load.regressors[r]),
                    Dgp::E2 => linear_factor(f, &load.regressors[r]),
                };
                xi[(s, r)] = gxi[(s, r)] + v[i][(s, r)];
            }
            y[(i, s)] = xi[(s, 0)] * beta[0] + xi[(s, 1)] * beta[1] + gy[(i, s)] + eps[(i, s)];
        }
        gx.push(gxi);
        xs.push(xi);
    }
    let panel = PanelData::new(
        (1..=n).map(|i| i.to_string()).collect(),
        (1..=t as i64).collect(),
        y,
        xs,
    )?;
    Ok(SimulatedPanel {
        panel,
        truth: Truth {
            beta: beta.to_vec(),
            factors,
            loadings,
            factor_component_y: gy,
            factor_component_x: gx,
            eps,
            v,
        },
    })
}

fn draw_factors<R: Rng + ?Sized>(rng: &mut R, t: usize, mode: FactorMode) -> DMatrix<f64> {
    match mode {
        FactorMode::Stationary => DMatrix::from_fn(t, 2, |_, _| rng.sample(StandardNormal)),
        FactorMode::RandomWalk => {
            let step = Normal::new(0.0, 0.05f64.sqrt()).expect("valid normal");
            let mut f = DMatrix::zeros(t, 2);
            let mut level = [0.0; 2];
            for s in 0..t {
                for r in 0..2 {
                    level[r] += rng.sample(step);
                    f[(s, r)] = level[r];
                }
            }
            f
        }
    }
}

fn draw_errors<R: Rng + ?Sized>(rng: &mut R, n: usize, t: usize, mode: ErrorMode) -> DMatrix<f64> {
    match mode {
        ErrorMode::Iid => DMatrix::from_fn(n, t, |_, _| rng.sample(StandardNormal)),
        ErrorMode::Correlated { pi, l_band } => correlated_errors_from_rng(rng, n, t, pi, l_band),
    }
}

/// Draws one panel from `config` using `rng`. The config seed is not consulted.
///
/// Draw order: loadings unit by unit, factors, `ε`, then the two `v` columns.
pub fn generate_with_rng<R: Rng + ?Sized>(config: &DgpConfig, rng: &mut R) -> Result<SimulatedPanel> {
    config.validate()?;
    let (n, t) = (config.n, config.t);
    let loadings: Vec<Loadings> = (0..n)
        .map(|_| Loadings::draw(rng, config.dgp, config.loading_law))
        .collect();
    let factors = draw_factors(rng, t, config.factor_mode);
    let eps = draw_errors(rng, n, t, config.error_mode);
    let v_cols = [
        draw_errors(rng, n, t, config.error_mode),
        draw_errors(rng, n, t, config.error_mode),
    ];
    let v = (0..n)
        .map(|i| DMatrix::from_fn(t, 2, |s, r| v_cols[r][(i, s)]))
        .collect();
    assemble(config.dgp, &config.beta, factors, loadings, eps, v)
}

/// Draws one panel on the stream keyed by `config.seed`.
pub fn generate(config: &DgpConfig) -> Result<SimulatedPanel> {
    generate_with_rng(config, &mut stream_rng(config.seed, DOMAIN_DGP, 0, 0))
}

pub fn generate_e1(config: &DgpConfig) -> Result<SimulatedPanel> {
    if config.dgp != Dgp::E1 {
        return Err(Error::InvalidConfig("generate_e1 needs dgp = E1".into()));
    }
    generate(config)
}

pub fn generate_e2(config: &DgpConfig) -> Result<SimulatedPanel> {
    if config.dgp != Dgp::E2 {
        return Err(Error::InvalidConfig("generate_e2 needs dgp = E2".into()));
    }
    generate(config)
}

/// `ε_it = π ε_i,t-1 + θ_it + π Σ_{l=1..L} (θ_i-l,t + θ_i+l,t)` with `ε_i0 = 0`.
/// Neighbours outside `0..N` contribute zero. `theta` is `N x T`.
pub fn correlated_errors_from_innovations(theta: &DMatrix<f64>, pi: f64, l_band: usize) -> DMatrix<f64> {
    let (n, t) = theta.shape();
    let mut eps = DMatrix::zeros(n, t);
    for s in 0..t {
        for i in 0..n {
            let lo = i.saturating_sub(l_band);
            let hi = (i + l_band).min(n - 1);
            let spatial: f64 = (lo..=hi).filter(|&j| j != i).map(|j| theta[(j, s)]).sum();
            let prev = if s > 0 { eps[(i, s - 1)] } else { 0.0 };
            eps[(i, s)] = pi * prev + theta[(i, s)] + pi * spatial;
        }
    }
    eps
}

/// Innovations `θ_it ~ N(0, σ_i²)` with `σ_i ~ U(0.5, 1)`, run through
/// [`correlated_errors_from_innovations`].
pub fn correlated_errors_from_rng<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    t: usize,
    pi: f64,
    l_band: usize,
) -> DMatrix<f64> {
    let sd = Uniform::new(0.5, 1.0).expect("valid range");
    let sigma: Vec<f64> = (0..n).map(|_| rng.sample(sd)).collect();
    let theta = DMatrix::from_fn(n, t, |i, _| sigma[i] * rng.sample::<f64, _>(StandardNormal));
    correlated_errors_from_innovations(&theta, pi, l_band)
}

pub fn generate_correlated_errors(n: usize, t: usize, pi: f64, l_band: usize, seed: u64) -> DMatrix<f64> {
    correlated_errors_from_rng(&mut stream_rng(seed, DOMAIN_DGP, 1, 0), n, t, pi, l_band)
}
