//! Sieve expansion of the factor proxy.
//!
//! Each proxy column `r` is expanded on its own through a univariate basis and the
//! `d+1` blocks are concatenated side by side. The default basis is the cubic
//! truncated-power spline `[1, v, v², v³, (v-θ₁)₊³, ..., (v-θ_J)₊³]` with knots at
//! the `k/(J+1)` empirical quantiles of that column. Every block carries its own
//! constant, so the concatenated matrix is rank deficient by construction; the
//! annihilator in [`crate::linalg`] is built on a pseudo-inverse and is unaffected.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::FactorProxy;
use crate::stats::{floor_root, quantile_sorted, sorted_copy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    CubicSpline,
    Hermite,
    PowerSeries,
}

/// Basis family and polynomial degree. Cubic splines always have degree 3; the
/// polynomial families use `degree + 1` columns per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFamily {
    kind: BasisKind,
    degree: usize,
}

impl BasisFamily {
    pub fn new(kind: BasisKind, degree: usize) -> Result<Self> {
        match kind {
            BasisKind::CubicSpline if degree != 3 => Err(Error::InvalidConfig(format!(
                "cubic spline requires degree 3, got {degree}"
            ))),
            _ if degree == 0 => Err(Error::InvalidConfig("basis degree must be positive".into())),
            _ => Ok(Self { kind, degree }),
        }
    }

    pub fn cubic_spline() -> Self {
        Self {
            kind: BasisKind::CubicSpline,
            degree: 3,
        }
    }

    /// Family whose block width equals that of a cubic spline with `j` knots:
    /// polynomial families get degree `3 + j`.
    pub fn matching_spline_width(kind: BasisKind, j: usize) -> Self {
        match kind {
            BasisKind::CubicSpline => Self::cubic_spline(),
            _ => Self {
                kind,
                degree: 3 + j,
            },
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Growth rate `r` in the knot rule `J = C ⌊T^{1/r}⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnotRate {
    #[default]
    Quarter,
    Third,
    Fifth,
    Tenth,
}

impl KnotRate {
    pub fn root(self) -> u32 {
        match self {
            KnotRate::Quarter => 4,
            KnotRate::Third => 3,
            KnotRate::Fifth => 5,
            KnotRate::Tenth => 10,
        }
    }
}

/// Number of knots `C ⌊T^{1/r}⌋`.
pub fn knot_count(t_periods: usize, c_multiplier: usize, rate: KnotRate) -> usize {
    c_multiplier * floor_root(t_periods, rate.root())
}

/// Knots at the `k/(j+1)` empirical quantiles, `k = 1..j`, ties collapsed.
pub fn compute_knots(series: &[f64], j: usize) -> Vec<f64> {
    if j == 0 || series.is_empty() {
        return Vec::new();
    }
    let sorted = sorted_copy(series);
    let mut knots: Vec<f64> = (1..=j)
        .map(|k| quantile_sorted(&sorted, k as f64 / (j + 1) as f64))
        .collect();
    knots.dedup_by(|b, a| *b <= *a);
    knots
}

/// `[1, v, v², v³, (v-θ₁)₊³, ..., (v-θ_J)₊³]`.
pub fn spline_basis_vector(value: f64, knots: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 + knots.len());
    out.extend([1.0, value, value * value, value * value * value]);
    out.extend(knots.iter().map(|&k| {
        let u = (value - k).max(0.0);
        u * u * u
    }));
    out
}

/// Probabilists' Hermite polynomials `He_0..He_degree` at `value`.
pub fn hermite_basis_vector(value: f64, degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    out.push(1.0);
    if degree >= 1 {
        out.push(value);
    }
    for n in 1..degree {
        let next = value * out[n] - n as f64 * out[n - 1];
        out.push(next);
    }
    out
}

/// `[1, v, ..., v^degree]`.
pub fn power_basis_vector(value: f64, degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut p = 1.0;
    for _ in 0..=degree {
        out.push(p);
        p *= value;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnTag {
    Constant,
    Linear,
    Nonlinear,
}

/// The `T x K` sieve matrix with per-column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveBasis {
    matrix: DMatrix<f64>,
    knots: Vec<Vec<f64>>,
    family: BasisFamily,
    j_requested: usize,
    column_tags: Vec<ColumnTag>,
}

impl SieveBasis {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Knots per proxy column (empty for the polynomial families).
    pub fn knots(&self) -> &[Vec<f64>] {
        &self.knots
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn j_requested(&self) -> usize {
        self.j_requested
    }

    pub fn column_tags(&self) -> &[ColumnTag] {
        &self.column_tags
    }

    pub fn n_columns(&self) -> usize {
        self.matrix.ncols()
    }

    /// Submatrix of the columns whose tag is in `tags`, in original order.
    pub fn columns_tagged(&self, tags: &[ColumnTag]) -> DMatrix<f64> {
        let idx: Vec<usize> = self
            .column_tags
            .iter()
            .enumerate()
            .filter(|(_, t)| tags.contains(t))
            .map(|(i, _)| i)
            .collect();
        self.matrix.select_columns(idx.iter())
    }

    pub fn nonlinear_columns(&self) -> DMatrix<f64> {
        self.columns_tagged(&[ColumnTag::Nonlinear])
    }

    /// Copy with every nonlinear column multiplied by `factor`.
    pub fn with_nonlinear_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for (c, tag) in self.column_tags.iter().enumerate() {
            if *tag == ColumnTag::Nonlinear {
                out.matrix.column_mut(c).scale_mut(factor);
            }
        }
        out
    }
}

/// Expands every proxy column through `family` and concatenates the blocks.
///
/// For cubic splines the knots of column `r` come from that column's own values.
/// The polynomial families ignore `j` beyond whatever degree `family` carries.
pub fn build_sieve_matrix(proxy: &FactorProxy, family: BasisFamily, j: usize) -> SieveBasis {
    let t = proxy.n_periods();
    let mut blocks: Vec<Vec<Vec<f64>>> = Vec::with_capacity(proxy.n_columns());
    let mut knots = Vec::with_capacity(proxy.n_columns());
    let mut tags = Vec::new();
    for r in 0..proxy.n_columns() {
        let series = proxy.column(r);
        let column_knots = match family.kind {
            BasisKind::CubicSpline => compute_knots(&series, j),
            _ => Vec::new(),
        };
        let rows: Vec<Vec<f64>> = series
            .iter()
            .map(|&v| match family.kind {
                BasisKind::CubicSpline => spline_basis_vector(v, &column_knots),
                BasisKind::Hermite => hermite_basis_vector(v, family.degree),
                BasisKind::PowerSeries => power_basis_vector(v, family.degree),
            })
            .collect();
        let width = rows[0].len();
        tags.push(ColumnTag::Constant);
        tags.push(ColumnTag::Linear);
        tags.extend(std::iter::repeat_n(ColumnTag::Nonlinear, width - 2));
        blocks.push(rows);
        knots.push(column_knots);
    }
    let k: usize = blocks.iter().map(|b| b[0].len()).sum();
    let mut matrix = DMatrix::zeros(t, k);
    let mut offset = 0;
    for block in &blocks {
        let width = block[0].len();
        for (s, row) in block.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                matrix[(s, offset + c)] = v;
            }
        }
        offset += width;
    }
    SieveBasis {
        matrix,
        knots,
        family,
        j_requested: j,
        column_tags: tags,
    }
}

/// Knot rule plus basis choice; resolves to a concrete basis once `T` is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub kind: BasisKind,
    pub knot_c: usize,
    pub rate: KnotRate,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            kind: BasisKind::CubicSpline,
            knot_c: 1,
            rate: KnotRate::Quarter,
        }
    }
}

impl SieveConfig {
    pub fn knots_for(&self, t_periods: usize) -> usize {
        knot_count(t_periods, self.knot_c, self.rate)
    }

    pub fn build(&self, proxy: &FactorProxy) -> SieveBasis {
        let j = self.knots_for(proxy.n_periods());
        build_sieve_matrix(proxy, BasisFamily::matching_spline_width(self.kind, j), j)
    }
}
