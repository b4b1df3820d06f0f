//! Sieve common correlated effects (SCCE) estimation for panels whose unobserved
//! factor structure may enter nonlinearly, together with the linear CCE baselines,
//! covariance and bootstrap inference, and a Monte Carlo harness.
//!
//! Typical flow:
//!
//! ```
//! use scce_core::{cross_sectional_average, scce_estimate, DgpConfig, Dgp, SieveConfig};
//!
//! let sim = scce_core::simulate::generate(&DgpConfig::new(Dgp::E1, 30, 30, 1)).unwrap();
//! let proxy = cross_sectional_average(&sim.panel);
//! let basis = SieveConfig::default().build(&proxy);
//! let fit = scce_estimate(&sim.panel, &basis).unwrap();
//! assert_eq!(fit.beta.len(), 2);
//! ```

pub mod error;
pub mod estimators;
pub mod inference;
pub mod linalg;
pub mod montecarlo;
pub mod panel;
pub mod sieve;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use estimators::{
    ccemg_estimate, ccep_estimate, estimate, scce_estimate, EstimationResult, Method,
};
pub use inference::{
    adf_test, bootstrap_ci, covariance, hac_theta, linearity_test, sandwich_covariance,
    sigma_v_hat, BootstrapConfig, BootstrapResult, CovarianceEstimate, TestResult,
};
pub use linalg::{annihilate, Annihilator};
pub use montecarlo::{monte_carlo_run, McConfig, McReport};
pub use panel::{
    cross_sectional_average, first_difference, validate_panel, FactorProxy, PanelData,
    PanelRecord,
};
pub use sieve::{
    build_sieve_matrix, compute_knots, knot_count, spline_basis_vector, BasisFamily, BasisKind,
    ColumnTag, KnotRate, SieveBasis, SieveConfig,
};
pub use simulate::{
    generate_correlated_errors, generate_e1, generate_e2, Dgp, DgpConfig, ErrorMode, FactorMode,
    LoadingLaw, SimulatedPanel,
};
