//! Synthetic-data experiments for the two-step estimator.
//!
//! Every replication draws from its own ChaCha8 stream (see [`model::stream_id`])
//! and writes into a pre-indexed slot, so reports are bitwise reproducible and
//! independent of how rayon schedules the work.

pub mod model;
pub mod stats;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{check_a11, A11Check, BandwidthPlan};
use crate::errdensity::{ise, naive_conditional_density, oracle_density, two_step_density};
use crate::kernels::{compute_constants, KernelConstants, KernelSpec};
use crate::quadrature::linspace;
use crate::regression::{g_hat, nw_estimate, residuals, Sample, TrimRegion};
use crate::{Error, Result};

pub use model::{simulate, simulate_stream, stream_id, ErrorFamily, GFamily, MFamily, ModelSpec};
use stats::{ks_distance_normal, loglog_slope, mean, median, sample_variance, strictly_decreasing, SlopeFit};

/// Evaluation grid for the error density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl EpsGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need count >= 2 and min < max, got [{min}, {max}] x {count}"
            )));
        }
        Ok(Self { min, max, count })
    }

    /// `±6σ` around zero with 601 points (`[-1, 1]` when σ = 0).
    pub fn default_for(spec: &ModelSpec) -> Self {
        let half = if spec.noise_scale > 0.0 { 6.0 * spec.noise_scale } else { 1.0 };
        Self { min: -half, max: half, count: 601 }
    }

    pub fn points(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }
}

/// How `(b0, b1)` are chosen inside an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `b1 = c1 · rate(n, d)`, `b0 = b0_star(n, d, b1, c0)`.
    ClosedForm { c0: f64, c1: f64 },
    /// AMISE plug-in `b1` from the known simulated density, `b0 = b0_star(n, d, b1, c0)`.
    AmisePlugin { c0: f64 },
    Manual { b0: f64, b1: f64 },
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule::ClosedForm { c0: 1.0, c1: 1.0 }
    }
}

impl BandwidthRule {
    /// `p_in_region` is only used by the plug-in rule.
    pub fn resolve(&self, spec: &ModelSpec, n: usize, p_in_region: f64) -> Result<BandwidthPlan<f64>> {
        match *self {
            BandwidthRule::ClosedForm { c0, c1 } => BandwidthPlan::closed_form(n, spec.d, c0, c1),
            BandwidthRule::AmisePlugin { c0 } => {
                if spec.noise_scale == 0.0 {
                    return Err(Error::ZeroCurvature);
                }
                let k1: KernelConstants<f64> = compute_constants(&KernelSpec::k1());
                BandwidthPlan::amise_plugin(n, spec.d, c0, spec.error_curvature(), &k1, p_in_region)
            }
            BandwidthRule::Manual { b0, b1 } => BandwidthPlan::manual(b0, b1),
        }
    }
}

/// Test hook: feed the true errors to the feasible estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSource {
    #[default]
    Estimated,
    TrueErrors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityStudyConfig {
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub eps0: f64,
    pub grid: EpsGrid,
    pub rule: BandwidthRule,
    pub residual_source: ResidualSource,
}

impl DensityStudyConfig {
    pub fn new(spec: &ModelSpec, n_grid: Vec<usize>, reps: usize) -> Self {
        Self {
            n_grid,
            reps,
            eps0: 0.0,
            grid: EpsGrid::default_for(spec),
            rule: BandwidthRule::default(),
            residual_source: ResidualSource::Estimated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rate,
    Gap,
    Normality,
    Supnorm,
    Contrast,
}

/// One replication of the density pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub n: usize,
    pub rep: usize,
    /// Replication dropped because every observation was trimmed.
    pub dropped: bool,
    pub b0: f64,
    pub b1: f64,
    pub n_trimmed_in: usize,
    pub p_in_region: f64,
    pub ise_feasible: f64,
    pub ise_oracle: f64,
    /// `max |f̂ − f̃|` over the grid.
    pub sup_gap: f64,
    /// `max |f̃ − f|` over the grid.
    pub sup_oracle_error: f64,
    pub f_hat_eps0: f64,
    /// Standardized statistic centred at the Monte Carlo mean.
    pub standardized: f64,
    /// Standardized statistic centred at `f + (b1²/2) f'' ∫v²K1`.
    pub standardized_theory: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormRow {
    pub n: usize,
    pub rep: usize,
    pub b0: f64,
    pub sup_g_error: f64,
    pub sup_m_error: f64,
    /// Evaluation points where the regression denominator vanished.
    pub empty_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastRow {
    pub n: usize,
    pub rep: usize,
    pub dropped: bool,
    pub two_step: f64,
    pub naive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "rows", rename_all = "snake_case")]
pub enum ReportRows {
    Density(Vec<DensityRow>),
    SupNorm(Vec<SupNormRow>),
    Contrast(Vec<ContrastRow>),
}

impl ReportRows {
    pub fn len(&self) -> usize {
        match self {
            ReportRows::Density(r) => r.len(),
            ReportRows::SupNorm(r) => r.len(),
            ReportRows::Contrast(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub kept: usize,
    pub dropped: usize,
    pub medians: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl NamedCheck {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalitySummary {
    pub n: usize,
    pub eps0: f64,
    pub b1: f64,
    pub center_mc: f64,
    pub center_theory: f64,
    pub ks_distance: f64,
    pub ks_distance_theory: f64,
    /// Sample variance of `√(n b1)(f̂(ε0) − MC mean)`.
    pub variance_empirical: f64,
    /// Mean over replications of `f(ε0) ∫K1² / P̂`.
    pub variance_theory: f64,
    pub variance_ratio: f64,
    pub a11: A11Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastSummary {
    pub n: usize,
    pub x0: Vec<f64>,
    pub eps0: f64,
    pub h: f64,
    pub target: f64,
    pub rmse_two_step: f64,
    pub rmse_naive: f64,
    pub ratio: f64,
}

/// Fully resolved experiment configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelSpec,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub eps0: Option<f64>,
    pub grid: Option<EpsGrid>,
    pub rule: Option<BandwidthRule>,
    pub residual_source: ResidualSource,
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: ReportRows,
    pub groups: Vec<GroupSummary>,
    pub slopes: Vec<SlopeFit>,
    pub checks: Vec<NamedCheck>,
    pub normality: Option<NormalitySummary>,
    pub contrast: Option<ContrastSummary>,
}

impl ExperimentReport {
    pub fn slope(&self, label: &str) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.label == label)
    }

    pub fn check(&self, name: &str) -> Option<&NamedCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn density_rows(&self) -> Option<&[DensityRow]> {
        match &self.rows {
            ReportRows::Density(r) => Some(r),
            _ => None,
        }
    }
}

fn fraction_inside(sample: &Sample<f64>, trim: &TrimRegion<f64>) -> f64 {
    sample.rows().filter(|r| trim.contains(r)).count() as f64 / sample.n() as f64
}

fn sup_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn density_replication(
    spec: &ModelSpec,
    n: usize,
    rep: usize,
    cfg: &DensityStudyConfig,
    grid: &[f64],
) -> Result<DensityRow> {
    let (sample, errors) = simulate_stream(spec, n, stream_id(n, rep))?;
    let trim = TrimRegion::auto(&sample)?;
    let plan = cfg.rule.resolve(spec, n, fraction_inside(&sample, &trim))?;
    let mut row = DensityRow {
        n,
        rep,
        dropped: true,
        b0: plan.b0,
        b1: plan.b1,
        n_trimmed_in: 0,
        p_in_region: f64::NAN,
        ise_feasible: f64::NAN,
        ise_oracle: f64::NAN,
        sup_gap: f64::NAN,
        sup_oracle_error: f64::NAN,
        f_hat_eps0: f64::NAN,
        standardized: f64::NAN,
        standardized_theory: f64::NAN,
    };
    let mut res = match residuals(&sample, plan.b0, &trim) {
        Ok(r) => r,
        Err(Error::AllTrimmed) => return Ok(row),
        Err(e) => return Err(e),
    };
    if cfg.residual_source == ResidualSource::TrueErrors {
        for (r, (&e, &m)) in res.residuals.iter_mut().zip(errors.iter().zip(&res.trim_mask)) {
            if m {
                *r = e;
            }
        }
    }
    let feasible = two_step_density(&res, plan.b1, grid)?;
    let oracle = oracle_density(&errors, &res.trim_mask, plan.b1, grid)?;
    let truth: Vec<f64> = grid.iter().map(|&e| spec.error_pdf(e)).collect();
    row.dropped = false;
    row.n_trimmed_in = res.n_trimmed_in;
    row.p_in_region = res.trimmed_in_fraction();
    row.ise_feasible = ise(&feasible, |e| spec.error_pdf(e))?;
    row.ise_oracle = ise(&oracle, |e| spec.error_pdf(e))?;
    row.sup_gap = sup_abs_diff(&feasible.values, &oracle.values);
    row.sup_oracle_error = sup_abs_diff(&oracle.values, &truth);
    row.f_hat_eps0 = two_step_density(&res, plan.b1, &[cfg.eps0])?.values[0];
    Ok(row)
}

/// Fills the standardized statistics group by group, in row order.
fn standardize(rows: &mut [DensityRow], spec: &ModelSpec, eps0: f64, k1: &KernelConstants<f64>) {
    let f0 = spec.error_pdf(eps0);
    let f2 = spec.error_pdf_d2(eps0);
    let mut start = 0;
    while start < rows.len() {
        let n = rows[start].n;
        let end = start + rows[start..].iter().take_while(|r| r.n == n).count();
        let kept: Vec<f64> = rows[start..end]
            .iter()
            .filter(|r| !r.dropped)
            .map(|r| r.f_hat_eps0)
            .collect();
        if !kept.is_empty() {
            let center = mean(&kept);
            for r in rows[start..end].iter_mut().filter(|r| !r.dropped) {
                let sigma = (f0 * k1.squared_integral / r.p_in_region).sqrt();
                let scale = (r.n as f64 * r.b1).sqrt();
                let theory = f0 + 0.5 * r.b1 * r.b1 * f2 * k1.second_moment;
                r.standardized = scale * (r.f_hat_eps0 - center) / sigma;
                r.standardized_theory = scale * (r.f_hat_eps0 - theory) / sigma;
            }
        }
        start = end;
    }
}

fn run_density_replications(spec: &ModelSpec, cfg: &DensityStudyConfig) -> Result<Vec<DensityRow>> {
    spec.validate()?;
    if cfg.reps == 0 || cfg.n_grid.is_empty() {
        return Err(Error::InvalidParameter("need at least one n and one replication".into()));
    }
    if cfg.n_grid.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter("every n must be >= 2".into()));
    }
    let grid = cfg.grid.points();
    let items: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.reps).map(move |r| (n, r)))
        .collect();
    let mut rows = items
        .par_iter()
        .map(|&(n, rep)| density_replication(spec, n, rep, cfg, &grid))
        .collect::<Result<Vec<_>>>()?;
    let k1 = compute_constants(&KernelSpec::k1());
    standardize(&mut rows, spec, cfg.eps0, &k1);
    Ok(rows)
}

fn density_groups(n_grid: &[usize], rows: &[DensityRow]) -> Vec<GroupSummary> {
    n_grid
        .iter()
        .map(|&n| {
            let group: Vec<&DensityRow> = rows.iter().filter(|r| r.n == n && !r.dropped).collect();
            let col = |f: fn(&DensityRow) -> f64| median(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let mut medians = BTreeMap::new();
            medians.insert("sqrt_ise_feasible".to_string(), col(|r| r.ise_feasible.sqrt()));
            medians.insert("sqrt_ise_oracle".to_string(), col(|r| r.ise_oracle.sqrt()));
            medians.insert("sup_gap".to_string(), col(|r| r.sup_gap));
            medians.insert("sup_oracle_error".to_string(), col(|r| r.sup_oracle_error));
            medians.insert("b0".to_string(), col(|r| r.b0));
            medians.insert("b1".to_string(), col(|r| r.b1));
            GroupSummary {
                n,
                kept: group.len(),
                dropped: rows.iter().filter(|r| r.n == n && r.dropped).count(),
                medians,
            }
        })
        .collect()
}

fn group_column(groups: &[GroupSummary], key: &str) -> Vec<f64> {
    groups.iter().map(|g| g.medians[key]).collect()
}

/// Runs the density pipeline over `n_grid × reps` and summarizes rates and
/// feasible/oracle gaps. Shared by [`rate_experiment`] and [`gap_experiment`].
pub fn density_study(spec: &ModelSpec, cfg: &DensityStudyConfig, kind: ExperimentKind) -> Result<ExperimentReport> {
    let rows = run_density_replications(spec, cfg)?;
    let groups = density_groups(&cfg.n_grid, &rows);
    let ns: Vec<f64> = cfg.n_grid.iter().map(|&n| n as f64).collect();
    let slopes = vec![
        loglog_slope("feasible_sqrt_ise", &ns, &group_column(&groups, "sqrt_ise_feasible")),
        loglog_slope("oracle_sqrt_ise", &ns, &group_column(&groups, "sqrt_ise_oracle")),
        loglog_slope("sup_gap", &ns, &group_column(&groups, "sup_gap")),
    ];
    let gaps = group_column(&groups, "sup_gap");
    let oracle_err = group_column(&groups, "sup_oracle_error");
    let (fs, os) = (slopes[0].slope, slopes[1].slope);
    let last = groups.len() - 1;
    let mut checks = vec![
        NamedCheck::new(
            "oracle_slope_control",
            os <= fs + 0.1,
            format!("oracle slope {os:.4} <= feasible slope {fs:.4} + 0.1"),
        ),
        NamedCheck::new(
            "gap_median_strictly_decreasing",
            strictly_decreasing(&gaps),
            format!("median sup-gap by n: {gaps:?}"),
        ),
    ];
    // only claimed for d <= 2
    if spec.d <= 2 {
        checks.push(NamedCheck::new(
            "gap_below_oracle_error_at_max_n",
            gaps[last] < oracle_err[last],
            format!(
                "at n = {}: median sup-gap {:.6} vs median sup|f~ - f| {:.6}",
                cfg.n_grid[last], gaps[last], oracle_err[last]
            ),
        ));
    }
    Ok(ExperimentReport {
        config: ExperimentConfig {
            kind,
            model: spec.clone(),
            n_grid: cfg.n_grid.clone(),
            reps: cfg.reps,
            eps0: Some(cfg.eps0),
            grid: Some(cfg.grid),
            rule: Some(cfg.rule),
            residual_source: cfg.residual_source,
            x0: None,
        },
        rows: ReportRows::Density(rows),
        groups,
        slopes,
        checks,
        normality: None,
        contrast: None,
    })
}

fn require_sweep(cfg: &DensityStudyConfig) -> Result<()> {
    if cfg.n_grid.len() < 4 || cfg.reps < 50 {
        return Err(Error::InvalidParameter(format!(
            "sweep needs at least 4 sample sizes and 50 replications, got {} and {}",
            cfg.n_grid.len(),
            cfg.reps
        )));
    }
    Ok(())
}

/// Convergence-rate experiment: slope of the median `√ISE` against `n`.
pub fn rate_experiment(spec: &ModelSpec, cfg: &DensityStudyConfig) -> Result<ExperimentReport> {
    require_sweep(cfg)?;
    density_study(spec, cfg, ExperimentKind::Rate)
}

/// Feasible-versus-oracle gap experiment.
pub fn gap_experiment(spec: &ModelSpec, cfg: &DensityStudyConfig) -> Result<ExperimentReport> {
    require_sweep(cfg)?;
    density_study(spec, cfg, ExperimentKind::Gap)
}

/// Standardized `√(n b1)(f̂(ε0) − centre)/σ` across replications at a single `n`,
/// compared with `N(0, 1)`.
pub fn normality_experiment(
    spec: &ModelSpec,
    n: usize,
    reps: usize,
    eps0: f64,
    rule: BandwidthRule,
) -> Result<ExperimentReport> {
    if reps < 300 {
        return Err(Error::InvalidParameter(format!("normality needs reps >= 300, got {reps}")));
    }
    if spec.noise_scale == 0.0 {
        return Err(Error::InvalidParameter("normality needs noise_scale > 0".into()));
    }
    let cfg = DensityStudyConfig {
        n_grid: vec![n],
        reps,
        eps0,
        grid: EpsGrid::default_for(spec),
        rule,
        residual_source: ResidualSource::Estimated,
    };
    let mut report = density_study(spec, &cfg, ExperimentKind::Normality)?;
    report.slopes.clear();
    report.checks.clear();
    let rows = report.density_rows().expect("density rows").to_vec();
    let kept: Vec<&DensityRow> = rows.iter().filter(|r| !r.dropped).collect();
    if kept.len() < 2 {
        return Err(Error::AllTrimmed);
    }
    let k1: KernelConstants<f64> = compute_constants(&KernelSpec::k1());
    let f0 = spec.error_pdf(eps0);
    let b1 = kept[0].b1;
    let center_mc = mean(&kept.iter().map(|r| r.f_hat_eps0).collect::<Vec<_>>());
    let scaled: Vec<f64> = kept
        .iter()
        .map(|r| (r.n as f64 * r.b1).sqrt() * (r.f_hat_eps0 - center_mc))
        .collect();
    let variance_empirical = sample_variance(&scaled);
    let variance_theory = mean(
        &kept
            .iter()
            .map(|r| f0 * k1.squared_integral / r.p_in_region)
            .collect::<Vec<_>>(),
    );
    let summary = NormalitySummary {
        n,
        eps0,
        b1,
        center_mc,
        center_theory: f0 + 0.5 * b1 * b1 * spec.error_pdf_d2(eps0) * k1.second_moment,
        ks_distance: ks_distance_normal(&kept.iter().map(|r| r.standardized).collect::<Vec<_>>()),
        ks_distance_theory: ks_distance_normal(
            &kept.iter().map(|r| r.standardized_theory).collect::<Vec<_>>(),
        ),
        variance_empirical,
        variance_theory,
        variance_ratio: variance_empirical / variance_theory,
        a11: check_a11(kept[0].b0, b1, n, spec.d),
    };
    report.checks = vec![
        NamedCheck::new(
            "ks_below_0.08",
            summary.ks_distance < 0.08,
            format!("KS distance {:.4}", summary.ks_distance),
        ),
        NamedCheck::new(
            "ks_theory_centred_below_0.08",
            summary.ks_distance_theory < 0.08,
            format!("KS distance {:.4}", summary.ks_distance_theory),
        ),
        NamedCheck::new(
            "variance_within_25_percent",
            (0.75..=1.25).contains(&summary.variance_ratio),
            format!("ratio {:.4}", summary.variance_ratio),
        ),
    ];
    report.normality = Some(summary);
    Ok(report)
}

fn supnorm_eval_points(d: usize) -> Vec<Vec<f64>> {
    let per_axis = match d {
        1 => 101,
        2 => 21,
        3 => 9,
        _ => 5,
    };
    let axis = linspace(0.1, 0.9, per_axis);
    let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    pts
}

/// Sup-norm errors of `ĝ` and `m̂` over a grid in `[0.1, 0.9]^d` with `b0 = n^(-1/(d+4))`.
pub fn supnorm_diagnostic(spec: &ModelSpec, n_grid: &[usize], reps: usize) -> Result<ExperimentReport> {
    spec.validate()?;
    if n_grid.is_empty() || reps == 0 || n_grid.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter("need n >= 2 values and reps >= 1".into()));
    }
    let pts = supnorm_eval_points(spec.d);
    let items: Vec<(usize, usize)> = n_grid.iter().flat_map(|&n| (0..reps).map(move |r| (n, r))).collect();
    let rows = items
        .par_iter()
        .map(|&(n, rep)| -> Result<SupNormRow> {
            let (sample, _) = simulate_stream(spec, n, stream_id(n, rep))?;
            let b0 = (n as f64).powf(-1.0 / (spec.d as f64 + 4.0));
            let mut sup_g: f64 = 0.0;
            let mut sup_m: f64 = 0.0;
            let mut empty = 0;
            for p in &pts {
                sup_g = sup_g.max((g_hat(&sample, b0, p)? - spec.g_family.density(p)).abs());
                match nw_estimate(&sample, b0, p) {
                    Ok(m) => sup_m = sup_m.max((m - spec.m_family.eval(p)).abs()),
                    Err(Error::EmptyNeighborhood) => empty += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(SupNormRow { n, rep, b0, sup_g_error: sup_g, sup_m_error: sup_m, empty_points: empty })
        })
        .collect::<Result<Vec<_>>>()?;
    let groups: Vec<GroupSummary> = n_grid
        .iter()
        .map(|&n| {
            let g: Vec<&SupNormRow> = rows.iter().filter(|r| r.n == n).collect();
            let mut medians = BTreeMap::new();
            medians.insert("sup_g_error".into(), median(&g.iter().map(|r| r.sup_g_error).collect::<Vec<_>>()));
            medians.insert("sup_m_error".into(), median(&g.iter().map(|r| r.sup_m_error).collect::<Vec<_>>()));
            medians.insert("b0".into(), g[0].b0);
            GroupSummary { n, kept: g.len(), dropped: 0, medians }
        })
        .collect();
    let gm = group_column(&groups, "sup_g_error");
    let mm = group_column(&groups, "sup_m_error");
    let checks = vec![
        NamedCheck::new("sup_g_median_strictly_decreasing", strictly_decreasing(&gm), format!("{gm:?}")),
        NamedCheck::new("sup_m_median_strictly_decreasing", strictly_decreasing(&mm), format!("{mm:?}")),
    ];
    Ok(ExperimentReport {
        config: ExperimentConfig {
            kind: ExperimentKind::Supnorm,
            model: spec.clone(),
            n_grid: n_grid.to_vec(),
            reps,
            eps0: None,
            grid: None,
            rule: None,
            residual_source: ResidualSource::Estimated,
            x0: None,
        },
        rows: ReportRows::SupNorm(rows),
        groups,
        slopes: Vec::new(),
        checks,
        normality: None,
        contrast: None,
    })
}

/// Pointwise RMSE at `ε0` of the two-step estimator and of the naive conditional
/// estimator at `x0`, the latter with `h0 = h1 = n^(-1/(d+5))`.
pub fn curse_contrast(
    spec: &ModelSpec,
    n: usize,
    reps: usize,
    x0: &[f64],
    eps0: f64,
    rule: BandwidthRule,
) -> Result<ExperimentReport> {
    spec.validate()?;
    if x0.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, found: x0.len() });
    }
    if spec.noise_scale == 0.0 || reps == 0 {
        return Err(Error::InvalidParameter("contrast needs noise_scale > 0 and reps >= 1".into()));
    }
    let h = (n as f64).powf(-1.0 / (spec.d as f64 + 5.0));
    let rows = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<ContrastRow> {
            let (sample, _) = simulate_stream(spec, n, stream_id(n, rep))?;
            let trim = TrimRegion::auto(&sample)?;
            let plan = rule.resolve(spec, n, fraction_inside(&sample, &trim))?;
            let mut row = ContrastRow { n, rep, dropped: true, two_step: f64::NAN, naive: f64::NAN };
            let res = match residuals(&sample, plan.b0, &trim) {
                Ok(r) => r,
                Err(Error::AllTrimmed) => return Ok(row),
                Err(e) => return Err(e),
            };
            let naive = match naive_conditional_density(&sample, plan.b0, h, h, x0, &[eps0]) {
                Ok(est) => est.values[0],
                Err(Error::EmptyNeighborhood) => return Ok(row),
                Err(e) => return Err(e),
            };
            row.two_step = two_step_density(&res, plan.b1, &[eps0])?.values[0];
            row.naive = naive;
            row.dropped = false;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let target = spec.error_pdf(eps0);
    let kept: Vec<&ContrastRow> = rows.iter().filter(|r| !r.dropped).collect();
    if kept.is_empty() {
        return Err(Error::AllTrimmed);
    }
    let rmse = |f: fn(&ContrastRow) -> f64| {
        (kept.iter().map(|r| (f(r) - target).powi(2)).sum::<f64>() / kept.len() as f64).sqrt()
    };
    let rmse_two_step = rmse(|r| r.two_step);
    let rmse_naive = rmse(|r| r.naive);
    Ok(ExperimentReport {
        config: ExperimentConfig {
            kind: ExperimentKind::Contrast,
            model: spec.clone(),
            n_grid: vec![n],
            reps,
            eps0: Some(eps0),
            grid: None,
            rule: Some(rule),
            residual_source: ResidualSource::Estimated,
            x0: Some(x0.to_vec()),
        },
        groups: vec![GroupSummary {
            n,
            kept: kept.len(),
            dropped: reps - kept.len(),
            medians: BTreeMap::new(),
        }],
        rows: ReportRows::Contrast(rows),
        slopes: Vec::new(),
        checks: Vec::new(),
        normality: None,
        contrast: Some(ContrastSummary {
            n,
            x0: x0.to_vec(),
            eps0,
            h,
            target,
            rmse_two_step,
            rmse_naive,
            ratio: rmse_naive / rmse_two_step,
        }),
    })
}
