//! Growth experiments over a grid of dimensions.
//!
//! Each `(n, sample)` cell builds a form, computes the blocked power sum
//! (`lhs`) and a norm value, and records `lhs / norm`. Which side of the true
//! ratio a row lands on depends on the norm's certification:
//!
//! | norm kind     | ratio is            |
//! |---------------|---------------------|
//! | exact         | a lower bound*      |
//! | upper bound   | a lower bound       |
//! | lower bound   | an upper bound      |
//!
//! (*) lower experiments divide by the norm of the k-linear witness `A`, which
//! dominates the norm of its lift, so even exact values give a lower bound.
//!
//! Cells run in parallel but results are sorted by `(n, sample)` before any
//! aggregation, so output is byte-identical for any worker count.

use std::fmt::Write as _;
use std::str::FromStr;

use num::{BigRational, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, serialize_rational, ExtendedExponent};
use crate::forms::BlockPattern;
use crate::norms::{
    diagonal_norm_analytic, estimate_norm, exact_norm_sup, interpolation_upper_bound, AscentConfig,
    NormEstimate, NormKind, SUP_ENUMERATION_LIMIT,
};
use crate::theory::{predicted_lambda, ExponentReport, RegimeParams};
use crate::witnesses::{
    block_duals, ksz_norm_exponent, lift_kform, random_dense, Distribution, WitnessFamily,
};

pub use crate::seed::derive_seed;

/// Slope tolerance when the norm is computed in closed form.
pub const ANALYTIC_SLOPE_TOL: f64 = 1e-9;
/// Slope tolerance for sampled families.
pub const SAMPLED_SLOPE_TOL: f64 = 0.15;
/// Largest spread of `max ratio / n^λ` across the grid accepted by upper runs.
pub const UPPER_STABILITY_LIMIT: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactSup,
    Ascent,
    Analytic,
    Interpolation,
}

impl FromStr for NormMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_sup" | "exact" => Ok(NormMethod::ExactSup),
            "ascent" => Ok(NormMethod::Ascent),
            "analytic" => Ok(NormMethod::Analytic),
            "interpolation" => Ok(NormMethod::Interpolation),
            other => Err(Error::domain(format!(
                "unknown norm method `{other}` (exact_sup|ascent|analytic|interpolation)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Diagonal,
    Ksz,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(FamilyKind::Diagonal),
            "ksz" => Ok(FamilyKind::Ksz),
            other => Err(Error::domain(format!(
                "unknown family `{other}` (diagonal|ksz)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifiedDirection {
    RatioIsLowerBound,
    RatioIsUpperBound,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub samples: usize,
    pub base_seed: u64,
    /// `None` selects the family's default.
    pub norm_method: Option<NormMethod>,
    /// Ascent settings; the seed is replaced per cell.
    pub ascent: AscentConfig,
    /// Worker threads; 0 uses the global pool. Never affects output.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_grid: vec![4, 8, 16, 32, 64],
            samples: 1,
            base_seed: 0,
            norm_method: None,
            ascent: AscentConfig::default(),
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < 3 {
            return Err(Error::domain("n-grid needs at least 3 points for fitting"));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(
                "n-grid must be positive and strictly increasing",
            ));
        }
        if self.samples == 0 {
            return Err(Error::domain("samples must be at least 1"));
        }
        Ok(())
    }
}

/// Powers-of-two grid `start, 2·start, …, ≤ stop`.
pub fn geometric_grid(start: usize, stop: usize, factor: usize) -> Result<Vec<usize>> {
    if start == 0 || factor < 2 || stop < start {
        return Err(Error::domain(
            "geometric grid needs 0 < start <= stop and factor >= 2",
        ));
    }
    let mut grid = vec![start];
    while let Some(next) = grid.last().unwrap().checked_mul(factor) {
        if next > stop {
            break;
        }
        grid.push(next);
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthSample {
    pub n: usize,
    pub sample: usize,
    pub lhs: f64,
    pub norm: f64,
    pub norm_kind: NormKind,
    pub ratio: f64,
    pub certified_direction: CertifiedDirection,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSummary {
    pub n: usize,
    pub min_ratio: f64,
    pub median_ratio: f64,
    pub max_ratio: f64,
    pub median_norm: f64,
    /// `max_ratio / n^λ`.
    pub scaled_max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub family: String,
    pub pattern: Vec<usize>,
    pub p: ExtendedExponent,
    #[serde(serialize_with = "serialize_rational")]
    pub r: BigRational,
    pub config: ExperimentConfig,
    pub norm_method: NormMethod,
    #[serde(skip)]
    pub samples: Vec<GrowthSample>,
    pub per_n: Vec<GridSummary>,
    /// Slope of the median ratio (lower runs) or the max ratio (upper runs).
    pub fitted_slope: f64,
    pub fitted_constant: f64,
    pub fit_max_residual: f64,
    /// Slope of the median norm value.
    pub norm_slope: f64,
    pub predicted: ExponentReport,
    pub certified: bool,
    pub slope_tolerance: f64,
    pub consistent: bool,
    pub verdict: String,
    pub warnings: Vec<String>,
}

impl ExperimentResult {
    /// Rows `n,sample,lhs,norm,norm_kind,ratio` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,sample,lhs,norm,norm_kind,ratio\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{:.16e}",
                s.n,
                s.sample,
                s.lhs,
                s.norm,
                s.norm_kind.as_str(),
                s.ratio
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summary serialises");
        text.push('\n');
        text
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub constant: f64,
    pub max_residual: f64,
}

/// Least squares on `(ln n, ln value)`; returns the slope and `exp(intercept)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) || points[0].0 <= 0.0 {
        return Err(Error::domain(
            "n values must be positive and strictly increasing",
        ));
    }
    if let Some(&(n, v)) = points.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::domain(format!(
            "value at n = {n} must be positive and finite, got {v}"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let max_residual = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Ok(LogLogFit {
        slope,
        constant: intercept.exp(),
        max_residual,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        0.5 * (sorted[len / 2 - 1] + sorted[len / 2])
    }
}

fn run_cells<F>(config: &ExperimentConfig, cell: F) -> Result<Vec<GrowthSample>>
where
    F: Fn(usize, usize) -> Result<GrowthSample> + Sync,
{
    let cells: Vec<(usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.samples).map(move |s| (n, s)))
        .collect();
    let compute =
        || -> Result<Vec<GrowthSample>> { cells.par_iter().map(|&(n, s)| cell(n, s)).collect() };
    let mut rows = if config.workers == 0 {
        compute()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?
            .install(compute)?
    };
    rows.sort_by_key(|r| (r.n, r.sample));
    Ok(rows)
}

fn summarize(rows: &[GrowthSample], grid: &[usize], lambda: f64) -> Vec<GridSummary> {
    grid.iter()
        .map(|&n| {
            let mut ratios: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.ratio).collect();
            let mut norms: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.norm).collect();
            ratios.sort_by(f64::total_cmp);
            norms.sort_by(f64::total_cmp);
            let max_ratio = *ratios.last().expect("samples >= 1");
            GridSummary {
                n,
                min_ratio: ratios[0],
                median_ratio: median(&ratios),
                max_ratio,
                median_norm: median(&norms),
                scaled_max_ratio: max_ratio / (n as f64).powf(lambda),
            }
        })
        .collect()
}

fn make_sample(
    n: usize,
    sample: usize,
    lhs: f64,
    norm: &NormEstimate,
    direction: CertifiedDirection,
) -> Result<GrowthSample> {
    if !(norm.value > 0.0) {
        return Err(Error::domain(format!(
            "norm vanished at n = {n}, sample {sample}"
        )));
    }
    Ok(GrowthSample {
        n,
        sample,
        lhs,
        norm: norm.value,
        norm_kind: norm.kind,
        ratio: lhs / norm.value,
        certified_direction: direction,
    })
}

fn exact(value: f64) -> NormEstimate {
    NormEstimate {
        value,
        kind: NormKind::Exact,
        witness: None,
        iterations: 0,
        restarts_used: 0,
        sweep_values: Vec::new(),
    }
}

fn check_norm_method(
    method: NormMethod,
    family: Option<FamilyKind>,
    degree: usize,
    exponents: &[ExtendedExponent],
    grid: &[usize],
) -> Result<()> {
    match method {
        NormMethod::Analytic if family != Some(FamilyKind::Diagonal) => Err(Error::domain(
            "analytic norms are only available for the diagonal family",
        )),
        NormMethod::ExactSup => {
            if exponents.iter().any(|e| !e.is_infinite()) {
                return Err(Error::domain("exact_sup norms require p = inf"));
            }
            let largest = *grid.last().expect("validated grid");
            if largest * (degree - 1) > SUP_ENUMERATION_LIMIT {
                return Err(Error::Resource(format!(
                    "exact_sup at n = {largest} needs n(m-1) = {} > {SUP_ENUMERATION_LIMIT}",
                    largest * (degree - 1)
                )));
            }
            Ok(())
        }
        NormMethod::Interpolation => {
            if degree != 2 || exponents[0] != exponents[1] {
                return Err(Error::Unsupported(
                    "interpolation norms need a bilinear form with equal exponents".into(),
                ));
            }
            if exponents[0] < ExtendedExponent::integer(2)? {
                return Err(Error::domain("interpolation norms need exponents >= 2"));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn compute_norm(
    method: NormMethod,
    form: &crate::forms::MultilinearForm,
    exponents: &[ExtendedExponent],
    ascent: &AscentConfig,
) -> Result<NormEstimate> {
    match method {
        NormMethod::ExactSup => exact_norm_sup(form),
        NormMethod::Ascent => estimate_norm(form, exponents, ascent),
        NormMethod::Interpolation => interpolation_upper_bound(form, &exponents[0]),
        NormMethod::Analytic => Ok(exact(diagonal_norm_analytic(
            form.degree(),
            exponents,
            form.dim(),
        )?)),
    }
}

fn format_lambda(q: &BigRational) -> String {
    q.to_string()
}

/// Growth of the blocked sum of a lifted witness family relative to the norm
/// of the underlying k-linear form on `ℓ_{r₁}×⋯×ℓ_{r_k}`, `r_j = p/n_j`.
pub fn run_lower_experiment(
    family: FamilyKind,
    pattern: &BlockPattern,
    p: &ExtendedExponent,
    r: &BigRational,
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    config.validate()?;
    let (m, k) = (pattern.m(), pattern.k());
    let predicted = predicted_lambda(&RegimeParams::new(m, k, p.clone(), r.clone())?)?;
    let duals = block_duals(pattern, p)?;
    if family == FamilyKind::Ksz {
        ksz_norm_exponent(k, &duals)?;
    }
    let largest = *config.n_grid.last().expect("validated grid");
    let method = config.norm_method.unwrap_or(match family {
        FamilyKind::Diagonal => NormMethod::Analytic,
        FamilyKind::Ksz if p.is_infinite() && largest * (k - 1) <= SUP_ENUMERATION_LIMIT => {
            NormMethod::ExactSup
        }
        FamilyKind::Ksz => NormMethod::Ascent,
    });
    check_norm_method(method, Some(family), k, &duals, &config.n_grid)?;
    if family == FamilyKind::Ksz {
        for &n in &config.n_grid {
            if n.checked_pow(k as u32)
                .is_none_or(|c| c > crate::forms::MAX_DENSE_ENTRIES)
            {
                return Err(Error::Resource(format!(
                    "random form at n = {n}, k = {k} is too large"
                )));
            }
        }
    }
    let r_f = rational_to_f64(r);

    let rows = run_cells(config, |n, sample| {
        let inner = match family {
            FamilyKind::Diagonal => WitnessFamily::Diagonal { k, n },
            FamilyKind::Ksz => WitnessFamily::Ksz {
                k,
                n,
                seed: derive_seed(config.base_seed, n as u64, sample as u64, "ksz"),
            },
        };
        let a = inner.build()?;
        let lifted = lift_kform(&a, pattern)?;
        let lhs = lifted.blocked_power_sum(pattern, r_f)?;
        let ascent = AscentConfig {
            seed: derive_seed(config.base_seed, n as u64, sample as u64, "ascent"),
            ..config.ascent.clone()
        };
        let norm = compute_norm(method, &a, &duals, &ascent)?;
        let direction = match norm.kind {
            NormKind::Exact | NormKind::UpperBound => CertifiedDirection::RatioIsLowerBound,
            NormKind::LowerBound => CertifiedDirection::Heuristic,
        };
        make_sample(n, sample, lhs, &norm, direction)
    })?;

    let lambda_f = rational_to_f64(&predicted.lambda);
    let per_n = summarize(&rows, &config.n_grid, lambda_f);
    let fit = fit_loglog(
        &per_n
            .iter()
            .map(|s| (s.n as f64, s.median_ratio))
            .collect::<Vec<_>>(),
    )?;
    let norm_fit = fit_loglog(
        &per_n
            .iter()
            .map(|s| (s.n as f64, s.median_norm))
            .collect::<Vec<_>>(),
    )?;
    let certified = rows
        .iter()
        .all(|r| r.certified_direction == CertifiedDirection::RatioIsLowerBound);
    let tolerance = if method == NormMethod::Analytic {
        ANALYTIC_SLOPE_TOL
    } else {
        SAMPLED_SLOPE_TOL
    };
    let diff = fit.slope - lambda_f;
    let consistent = if predicted.lambda.is_zero() {
        fit.slope <= tolerance
    } else {
        diff.abs() <= tolerance
    };
    let family_bound = match family {
        FamilyKind::Diagonal => ("diagonal", &predicted.lower_bounds.diagonal),
        FamilyKind::Ksz => ("ksz", &predicted.lower_bounds.ksz),
    };
    let mut verdict = format!(
        "slope {:.6} vs predicted {} (|diff| = {:.3e}, tolerance {:e}): {}; {} lower-bound expression {}; {}",
        fit.slope,
        format_lambda(&predicted.lambda),
        diff.abs(),
        tolerance,
        if consistent { "consistent" } else { "INCONSISTENT" },
        family_bound.0,
        family_bound.1,
        if certified { "certified lower bound on the ratio" } else { "heuristic (norm is a lower bound)" },
    );
    if let Some(alt) = &predicted.lambda_alt {
        let _ = write!(verdict, "; case (b) alternative {alt}");
    }
    let warnings = predicted.warnings.clone();

    Ok(ExperimentResult {
        kind: ExperimentKind::Lower,
        family: family_tag(family).into(),
        pattern: pattern.blocks().to_vec(),
        p: p.clone(),
        r: r.clone(),
        config: config.clone(),
        norm_method: method,
        samples: rows,
        per_n,
        fitted_slope: fit.slope,
        fitted_constant: fit.constant,
        fit_max_residual: fit.max_residual,
        norm_slope: norm_fit.slope,
        predicted,
        certified,
        slope_tolerance: tolerance,
        consistent,
        verdict,
        warnings,
    })
}

fn family_tag(f: FamilyKind) -> &'static str {
    match f {
        FamilyKind::Diagonal => "diagonal",
        FamilyKind::Ksz => "ksz",
    }
}

/// Samples random dense m-linear forms and tracks `max ratio / n^λ`, with
/// norms by ascent (lower bounds) so every ratio over-estimates the truth.
pub fn run_upper_experiment(
    distribution: Distribution,
    pattern: &BlockPattern,
    p: &ExtendedExponent,
    r: &BigRational,
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    config.validate()?;
    let (m, k) = (pattern.m(), pattern.k());
    let predicted = predicted_lambda(&RegimeParams::new(m, k, p.clone(), r.clone())?)?;
    let exponents = vec![p.clone(); m];
    let method = config.norm_method.unwrap_or(NormMethod::Ascent);
    check_norm_method(method, None, m, &exponents, &config.n_grid)?;
    for &n in &config.n_grid {
        if n.checked_pow(m as u32)
            .is_none_or(|c| c > crate::forms::MAX_DENSE_ENTRIES)
        {
            return Err(Error::Resource(format!(
                "dense form at n = {n}, m = {m} exceeds {} coefficients",
                crate::forms::MAX_DENSE_ENTRIES
            )));
        }
    }
    let r_f = rational_to_f64(r);
    let tag = match distribution {
        Distribution::Gaussian => "upper-gaussian",
        Distribution::Sign => "upper-sign",
    };

    let rows = run_cells(config, |n, sample| {
        let seed = derive_seed(config.base_seed, n as u64, sample as u64, tag);
        let t = random_dense(m, n, distribution, seed)?;
        let lhs = t.blocked_power_sum(pattern, r_f)?;
        let ascent = AscentConfig {
            seed: derive_seed(config.base_seed, n as u64, sample as u64, "ascent"),
            ..config.ascent.clone()
        };
        let norm = compute_norm(method, &t, &exponents, &ascent)?;
        let direction = match norm.kind {
            NormKind::LowerBound => CertifiedDirection::RatioIsUpperBound,
            NormKind::Exact | NormKind::UpperBound => CertifiedDirection::RatioIsLowerBound,
        };
        make_sample(n, sample, lhs, &norm, direction)
    })?;

    let lambda_f = rational_to_f64(&predicted.lambda);
    let per_n = summarize(&rows, &config.n_grid, lambda_f);
    let fit = fit_loglog(
        &per_n
            .iter()
            .map(|s| (s.n as f64, s.max_ratio))
            .collect::<Vec<_>>(),
    )?;
    let norm_fit = fit_loglog(
        &per_n
            .iter()
            .map(|s| (s.n as f64, s.median_norm))
            .collect::<Vec<_>>(),
    )?;
    let scaled: Vec<f64> = per_n.iter().map(|s| s.scaled_max_ratio).collect();
    let spread = scaled.iter().cloned().fold(f64::MIN, f64::max)
        / scaled.iter().cloned().fold(f64::MAX, f64::min);
    let consistent = spread < UPPER_STABILITY_LIMIT;
    let certified = rows
        .iter()
        .all(|r| r.certified_direction == CertifiedDirection::RatioIsUpperBound);
    let verdict = format!(
        "max ratio / n^{} spans x{:.3} across the grid (limit x{}): {}; slope {:.6} vs predicted {}; {}",
        format_lambda(&predicted.lambda),
        spread,
        UPPER_STABILITY_LIMIT,
        if consistent { "bounded" } else { "UNBOUNDED" },
        fit.slope,
        format_lambda(&predicted.lambda),
        if certified { "certified upper bound on the ratio" } else { "ratio is not an upper bound" },
    );
    let warnings = predicted.warnings.clone();

    Ok(ExperimentResult {
        kind: ExperimentKind::Upper,
        family: distribution_tag(distribution).into(),
        pattern: pattern.blocks().to_vec(),
        p: p.clone(),
        r: r.clone(),
        config: config.clone(),
        norm_method: method,
        samples: rows,
        per_n,
        fitted_slope: fit.slope,
        fitted_constant: fit.constant,
        fit_max_residual: fit.max_residual,
        norm_slope: norm_fit.slope,
        predicted,
        certified,
        slope_tolerance: SAMPLED_SLOPE_TOL,
        consistent,
        verdict,
        warnings,
    })
}

fn distribution_tag(d: Distribution) -> &'static str {
    match d {
        Distribution::Gaussian => "gaussian",
        Distribution::Sign => "sign",
    }
}
