//! Fixtures shared by the benchmarks.

use scce_core::simulate::generate;
use scce_core::{Dgp, DgpConfig, PanelData};

/// Stationary E1 panel with iid errors.
pub fn e1_panel(n: usize, t: usize, seed: u64) -> PanelData {
    generate(&DgpConfig::new(Dgp::E1, n, t, seed))
        .expect("valid design")
        .panel
}
