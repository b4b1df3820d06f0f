//! Small numeric helpers shared across modules.

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Empirical quantile of ascending-sorted `sorted` at probability `p` using the
/// linear-interpolation convention `h = (n-1)p`,
/// `q = v[floor(h)] + (h - floor(h)) (v[floor(h)+1] - v[floor(h)])`.
///
/// This is the single quantile convention of the crate: sieve knots and bootstrap
/// percentile intervals both go through it.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Sorts a copy of `values` (total order) and returns it.
pub fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest integer `k` with `k^root <= value`, i.e. `floor(value^(1/root))` computed
/// without floating-point edge errors at exact powers.
pub fn floor_root(value: usize, root: u32) -> usize {
    assert!(root >= 1);
    if value < 2 {
        return value;
    }
    let mut k = (value as f64).powf(1.0 / root as f64).floor() as usize;
    let pow = |b: usize| -> Option<usize> { b.checked_pow(root) };
    while pow(k + 1).is_some_and(|p| p <= value) {
        k += 1;
    }
    while pow(k).is_none_or(|p| p > value) {
        k -= 1;
    }
    k
}
