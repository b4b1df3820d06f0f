use std::io::Write;
use std::path::Path;

use scce_core::inference::TestResult;
use scce_core::montecarlo::SCHEMA_VERSION;
use scce_core::{
    adf_test, bootstrap_ci, covariance, cross_sectional_average, first_difference,
    linearity_test, monte_carlo_run, BasisKind, BootstrapConfig, DgpConfig, Error, ErrorMode,
    FactorMode, KnotRate, LoadingLaw, McConfig, Method, PanelData, Result, SieveConfig,
};
use serde::Serialize;

use crate::{
    ErrorArg, EstimateArgs, FactorArg, Format, GenerateArgs, LinearityArgs, LoadingArg,
    OutputArgs, SieveArgs, SimulateArgs,
};

fn sieve_config(args: &SieveArgs) -> SieveConfig {
    let default = SieveConfig::default();
    SieveConfig {
        kind: args.basis.map_or(default.kind, BasisKind::from),
        knot_c: args.knot_c.unwrap_or(default.knot_c),
        rate: args.knot_rate.map_or(default.rate, KnotRate::from),
    }
}

fn emit(out: &OutputArgs, body: &str) -> Result<()> {
    write_text(out.output.as_deref(), body)
}

fn write_text(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn load_panel(path: &Path, diff: bool) -> Result<(PanelData, PanelData)> {
    let levels = PanelData::read_csv(path)?;
    let working = if diff {
        first_difference(&levels)?
    } else {
        levels.clone()
    };
    Ok((levels, working))
}

#[derive(Serialize)]
struct SieveReport {
    basis: BasisKind,
    knot_c: usize,
    knot_rate: KnotRate,
    knots_requested: usize,
    columns: usize,
}

fn sieve_report(config: &SieveConfig, panel: &PanelData) -> SieveReport {
    let basis = config.build(&cross_sectional_average(panel));
    SieveReport {
        basis: config.kind,
        knot_c: config.knot_c,
        knot_rate: config.rate,
        knots_requested: basis.j_requested(),
        columns: basis.n_columns(),
    }
}

#[derive(Serialize)]
struct CoefficientRow {
    name: String,
    estimate: f64,
    std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci_upper: Option<f64>,
}

#[derive(Serialize)]
struct BootstrapSummary {
    replications: usize,
    skipped: usize,
    level: f64,
    seed: u64,
}

#[derive(Serialize)]
struct AdfRow {
    column: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lag: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reject_unit_root_5pct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct EstimateReport {
    schema_version: u32,
    command: &'static str,
    method: Method,
    n_units: usize,
    n_periods: usize,
    differenced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sieve: Option<SieveReport>,
    projection_rank: usize,
    hac_window: usize,
    coefficients: Vec<CoefficientRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<BootstrapSummary>,
    adf: Vec<AdfRow>,
}

/// ADF statistics for each column of the level proxy `[mean y, mean x1, ...]`.
fn adf_rows(levels: &PanelData) -> Vec<AdfRow> {
    let proxy = cross_sectional_average(levels);
    let names = std::iter::once("y".to_string()).chain(levels.regressor_names().iter().cloned());
    names
        .enumerate()
        .map(|(r, name)| {
            let column = format!("mean_{name}");
            match adf_test(&proxy.column(r), None) {
                Ok(t) => AdfRow {
                    column,
                    statistic: Some(t.statistic),
                    lag: t.lag,
                    p_value: Some(t.p_value),
                    reject_unit_root_5pct: Some(t.decision_at_5pct),
                    error: None,
                },
                Err(e) => AdfRow {
                    column,
                    statistic: None,
                    lag: None,
                    p_value: None,
                    reject_unit_root_5pct: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn warn_ignored_sieve(method: Method, sieve: &SieveArgs) {
    if method != Method::Scce && sieve.any_set() {
        eprintln!("warning: --knot-c, --knot-rate and --basis have no effect with --method {method}");
    }
}

pub fn estimate(args: &EstimateArgs) -> Result<()> {
    let method = Method::from(args.method);
    warn_ignored_sieve(method, &args.sieve);
    let sieve = sieve_config(&args.sieve);
    let (levels, panel) = load_panel(&args.input, args.diff)?;
    let fit = scce_core::estimate(&panel, method, &sieve)?;
    let cov = covariance(&fit, args.hac_window)?;
    let boot = match args.bootstrap {
        Some(b) => Some(bootstrap_ci(
            &panel,
            &BootstrapConfig {
                method,
                sieve,
                replications: b,
                level: args.ci_level,
                seed: args.seed,
            },
        )?),
        None => None,
    };
    let coefficients = panel
        .regressor_names()
        .iter()
        .enumerate()
        .map(|(k, name)| CoefficientRow {
            name: name.clone(),
            estimate: fit.beta[k],
            std_error: cov.std_errors[k],
            ci_lower: boot.as_ref().map(|b| b.ci_lower[k]),
            ci_upper: boot.as_ref().map(|b| b.ci_upper[k]),
        })
        .collect::<Vec<_>>();
    let body = match args.output.format {
        Format::Csv => coefficient_csv(&coefficients)?,
        Format::Json => to_json(&EstimateReport {
            schema_version: SCHEMA_VERSION,
            command: "estimate",
            method,
            n_units: panel.n_units(),
            n_periods: panel.n_periods(),
            differenced: args.diff,
            sieve: (method == Method::Scce).then(|| sieve_report(&sieve, &panel)),
            projection_rank: fit.projection_rank,
            hac_window: cov.hac_window,
            coefficients,
            bootstrap: boot.as_ref().map(|b| BootstrapSummary {
                replications: b.replications,
                skipped: b.skipped,
                level: b.level,
                seed: b.seed,
            }),
            adf: adf_rows(&levels),
        }),
    };
    emit(&args.output, &body)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn coefficient_csv(rows: &[CoefficientRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "estimate", "std_error", "ci_lower", "ci_upper"])
        .map_err(csv_err)?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.estimate.to_string(),
            r.std_error.to_string(),
            fmt(r.ci_lower),
            fmt(r.ci_upper),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("UTF-8 output"))
}

fn error_mode(kind: ErrorArg, pi: f64, l_band: usize) -> ErrorMode {
    match kind {
        ErrorArg::Iid => ErrorMode::Iid,
        ErrorArg::Correlated => ErrorMode::Correlated { pi, l_band },
    }
}

fn factor_mode(kind: FactorArg) -> FactorMode {
    match kind {
        FactorArg::Stationary => FactorMode::Stationary,
        FactorArg::RandomWalk => FactorMode::RandomWalk,
    }
}

fn loading_law(kind: LoadingArg) -> LoadingLaw {
    match kind {
        LoadingArg::Standard => LoadingLaw::Standard,
        LoadingArg::ShiftedMeans => LoadingLaw::ShiftedMeans,
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let method = Method::from(args.method);
    warn_ignored_sieve(method, &args.sieve);
    let mut config = McConfig::new(args.dgp.into(), method);
    config.sieve = sieve_config(&args.sieve);
    config.factor_mode = factor_mode(args.factors);
    config.error_mode = error_mode(args.errors, args.pi, args.l_band);
    config.loading_law = loading_law(args.loadings);
    config.dgp_config(2, 2).validate()?;
    let grid: Vec<(usize, usize)> = args
        .n
        .iter()
        .flat_map(|&n| args.t.iter().map(move |&t| (n, t)))
        .collect();
    let report = monte_carlo_run(&grid, &config, args.reps, args.seed)?;
    let body = match args.output.format {
        Format::Csv => report.to_csv()?,
        Format::Json => to_json(&report),
    };
    emit(&args.output, &body)
}

#[derive(Serialize)]
struct LinearityReport {
    schema_version: u32,
    command: &'static str,
    n_units: usize,
    n_periods: usize,
    differenced: bool,
    sieve: SieveReport,
    #[serde(flatten)]
    result: TestResult,
}

pub fn test_linearity(args: &LinearityArgs) -> Result<()> {
    let sieve = sieve_config(&args.sieve);
    let (_, panel) = load_panel(&args.input, args.diff)?;
    let basis = sieve.build(&cross_sectional_average(&panel));
    let result = linearity_test(&panel, &basis)?;
    let body = match args.output.format {
        Format::Csv => format!(
            "statistic,dof,p_value,reject_5pct\n{},{},{},{}\n",
            result.statistic, result.dof, result.p_value, result.decision_at_5pct
        ),
        Format::Json => to_json(&LinearityReport {
            schema_version: SCHEMA_VERSION,
            command: "test-linearity",
            n_units: panel.n_units(),
            n_periods: panel.n_periods(),
            differenced: args.diff,
            sieve: sieve_report(&sieve, &panel),
            result,
        }),
    };
    emit(&args.output, &body)
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let config = DgpConfig {
        factor_mode: factor_mode(args.factors),
        error_mode: error_mode(args.errors, args.pi, args.l_band),
        loading_law: loading_law(args.loadings),
        ..DgpConfig::new(args.dgp.into(), args.n, args.t, args.seed)
    };
    let sim = scce_core::simulate::generate(&config)?;
    let mut buf = Vec::new();
    sim.panel.write_csv(&mut buf)?;
    write_text(args.output.as_deref(), &String::from_utf8(buf).expect("UTF-8 output"))
}
