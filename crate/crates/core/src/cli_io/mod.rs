//! Configuration, data ingestion and result files behind the `errdens` binary.
//!
//! Every run writes a CSV and a JSON sidecar next to it:
//! `<output>.meta.json` for `estimate`, `<output>.summary.json` for the
//! experiment modes. The sidecar carries the resolved configuration.

mod config;
mod csvio;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{parse_config_text, parse_overrides, B1Rule, Mode, RunConfig, KNOWN_KEYS};
pub use csvio::{fmt_f64, load_sample, parse_sample, sample_to_csv, table_to_csv, write_sample};

use crate::bandwidth::{b0_star, b1_star_rate, check_a11, A11Check};
use crate::errdensity::two_step_density;
use crate::montecarlo::{
    curse_contrast, gap_experiment, normality_experiment, rate_experiment, simulate, supnorm_diagnostic,
    BandwidthRule, DensityStudyConfig, EpsGrid, ExperimentReport, ReportRows,
};
use crate::quadrature::linspace;
use crate::regression::{residuals, ResidualDiagnostics, TrimRegion};
use crate::{Error, Result};

/// Paths written by [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub sidecar: Option<PathBuf>,
}

fn sidecar_path(output: &Path, suffix: &str) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Worker count from `ERRDENS_THREADS` (0 or unset = rayon default).
pub fn thread_count_from_env() -> Result<usize> {
    match std::env::var("ERRDENS_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("ERRDENS_THREADS must be a non-negative integer, got '{v}'"))),
    }
}

/// Executes one run on a rayon pool capped by `ERRDENS_THREADS`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count_from_env()?)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.mode {
        Mode::Estimate => run_estimate(cfg),
        Mode::Simulate => run_simulate(cfg),
        _ => run_experiment(cfg),
    })
}

#[derive(Serialize)]
struct EstimateMeta {
    config: BTreeMap<String, String>,
    n: usize,
    d: usize,
    b0: f64,
    b1: f64,
    trim_lower: Vec<f64>,
    trim_upper: Vec<f64>,
    n_trimmed_in: usize,
    diagnostics: ResidualDiagnostics,
    a11: A11Check,
}

fn run_estimate(cfg: &RunConfig) -> Result<RunOutput> {
    let input = cfg.input.as_ref().ok_or_else(|| Error::Config("estimate mode requires input".into()))?;
    let sample = load_sample(input)?;
    let (n, d) = (sample.n(), sample.d());
    let trim = match (&cfg.trim_lower, &cfg.trim_upper) {
        (Some(lo), Some(hi)) => TrimRegion::new(lo.clone(), hi.clone())?,
        _ => TrimRegion::auto(&sample)?,
    };
    let b1 = cfg.b1.unwrap_or_else(|| b1_star_rate(n, d, cfg.c1));
    let b0 = cfg.b0.unwrap_or_else(|| b0_star(n, d, b1, cfg.c0));
    let res = residuals(&sample, b0, &trim)?;
    // auto grid: the support of the estimate
    let (rmin, rmax) = res
        .trimmed_in()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let lo = cfg.grid_min.unwrap_or(rmin - b1);
    let hi = cfg.grid_max.unwrap_or(rmax + b1);
    let grid = EpsGrid::new(lo, hi, cfg.grid_count)?;
    let est = two_step_density(&res, b1, &linspace(grid.min, grid.max, grid.count))?;

    let rows: Vec<Vec<String>> = est
        .grid
        .iter()
        .zip(&est.values)
        .map(|(e, f)| vec![fmt_f64(*e), fmt_f64(*f)])
        .collect();
    std::fs::write(&cfg.output, table_to_csv(&["epsilon", "f_hat"], &rows)?)?;

    let mut resolved = cfg.clone();
    resolved.b0 = Some(b0);
    resolved.b1 = Some(b1);
    resolved.grid_min = Some(grid.min);
    resolved.grid_max = Some(grid.max);
    resolved.trim_lower = Some(trim.lower().to_vec());
    resolved.trim_upper = Some(trim.upper().to_vec());
    resolved.d = d;
    resolved.n = n;
    let meta = EstimateMeta {
        config: resolved.to_pairs(),
        n,
        d,
        b0,
        b1,
        trim_lower: trim.lower().to_vec(),
        trim_upper: trim.upper().to_vec(),
        n_trimmed_in: res.n_trimmed_in,
        diagnostics: res.diagnostics,
        a11: check_a11(b0, b1, n, d),
    };
    let side = sidecar_path(&cfg.output, ".meta.json");
    write_json(&side, &meta)?;
    Ok(RunOutput { csv: cfg.output.clone(), sidecar: Some(side) })
}

fn run_simulate(cfg: &RunConfig) -> Result<RunOutput> {
    let (sample, _) = simulate(&cfg.model(), cfg.n)?;
    write_sample(&cfg.output, &sample)?;
    Ok(RunOutput { csv: cfg.output.clone(), sidecar: None })
}

fn bandwidth_rule(cfg: &RunConfig) -> BandwidthRule {
    match (cfg.b0, cfg.b1) {
        (Some(b0), Some(b1)) => BandwidthRule::Manual { b0, b1 },
        _ => match cfg.b1_rule {
            B1Rule::Rate => BandwidthRule::ClosedForm { c0: cfg.c0, c1: cfg.c1 },
            B1Rule::Amise => BandwidthRule::AmisePlugin { c0: cfg.c0 },
        },
    }
}

/// Runs the experiment selected by `cfg.mode` without writing files.
pub fn experiment_report(cfg: &RunConfig) -> Result<ExperimentReport> {
    let spec = cfg.model();
    let rule = bandwidth_rule(cfg);
    let study = || -> Result<DensityStudyConfig> {
        let default = EpsGrid::default_for(&spec);
        Ok(DensityStudyConfig {
            n_grid: cfg.n_grid.clone(),
            reps: cfg.reps,
            eps0: cfg.eps0,
            grid: EpsGrid::new(
                cfg.grid_min.unwrap_or(default.min),
                cfg.grid_max.unwrap_or(default.max),
                cfg.grid_count,
            )?,
            rule,
            residual_source: cfg.residual_source,
        })
    };
    match cfg.mode {
        Mode::Rate => rate_experiment(&spec, &study()?),
        Mode::Gap => gap_experiment(&spec, &study()?),
        Mode::Normality => normality_experiment(&spec, cfg.n, cfg.reps, cfg.eps0, rule),
        Mode::Supnorm => supnorm_diagnostic(&spec, &cfg.n_grid, cfg.reps),
        Mode::Contrast => {
            let x0 = cfg.x0.clone().unwrap_or_else(|| vec![0.5; spec.d]);
            curse_contrast(&spec, cfg.n, cfg.reps, &x0, cfg.eps0, rule)
        }
        Mode::Estimate | Mode::Simulate => Err(Error::Config(format!("{} is not an experiment", cfg.mode.name()))),
    }
}

/// Header and formatted rows of the per-replication table.
pub fn report_table(report: &ExperimentReport) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let f = |v: f64| fmt_f64(v);
    match &report.rows {
        ReportRows::Density(rows) => (
            vec![
                "n",
                "rep",
                "dropped",
                "b0",
                "b1",
                "n_trimmed_in",
                "p_in_region",
                "ise_feasible",
                "ise_oracle",
                "sup_gap",
                "sup_oracle_error",
                "f_hat_eps0",
                "standardized",
                "standardized_theory",
            ],
            rows.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.rep.to_string(),
                        r.dropped.to_string(),
                        f(r.b0),
                        f(r.b1),
                        r.n_trimmed_in.to_string(),
                        f(r.p_in_region),
                        f(r.ise_feasible),
                        f(r.ise_oracle),
                        f(r.sup_gap),
                        f(r.sup_oracle_error),
                        f(r.f_hat_eps0),
                        f(r.standardized),
                        f(r.standardized_theory),
                    ]
                })
                .collect(),
        ),
        ReportRows::SupNorm(rows) => (
            vec!["n", "rep", "b0", "sup_g_error", "sup_m_error", "empty_points"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.rep.to_string(),
                        f(r.b0),
                        f(r.sup_g_error),
                        f(r.sup_m_error),
                        r.empty_points.to_string(),
                    ]
                })
                .collect(),
        ),
        ReportRows::Contrast(rows) => (
            vec!["n", "rep", "dropped", "two_step", "naive"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.rep.to_string(),
                        r.dropped.to_string(),
                        f(r.two_step),
                        f(r.naive),
                    ]
                })
                .collect(),
        ),
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    config: BTreeMap<String, String>,
    experiment: &'a crate::montecarlo::ExperimentConfig,
    groups: &'a [crate::montecarlo::GroupSummary],
    slopes: &'a [crate::montecarlo::stats::SlopeFit],
    checks: &'a [crate::montecarlo::NamedCheck],
    normality: &'a Option<crate::montecarlo::NormalitySummary>,
    contrast: &'a Option<crate::montecarlo::ContrastSummary>,
}

fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    let report = experiment_report(cfg)?;
    let (header, rows) = report_table(&report);
    std::fs::write(&cfg.output, table_to_csv(&header, &rows)?)?;
    let mut resolved = cfg.clone();
    if let Some(g) = report.config.grid {
        resolved.grid_min = Some(g.min);
        resolved.grid_max = Some(g.max);
    }
    if let Some(x0) = &report.config.x0 {
        resolved.x0 = Some(x0.clone());
    }
    let summary = Summary {
        config: resolved.to_pairs(),
        experiment: &report.config,
        groups: &report.groups,
        slopes: &report.slopes,
        checks: &report.checks,
        normality: &report.normality,
        contrast: &report.contrast,
    };
    let side = sidecar_path(&cfg.output, ".summary.json");
    write_json(&side, &summary)?;
    Ok(RunOutput { csv: cfg.output.clone(), sidecar: Some(side) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{ErrorFamily, GFamily, MFamily, ModelSpec};
    use crate::quadrature::trapezoid;

    #[test]
    fn estimate_on_noiseless_constant_concentrates_at_zero() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ModelSpec {
            d: 1,
            m_family: MFamily::Constant,
            g_family: GFamily::UniformBox,
            f_family: ErrorFamily::StdNormal,
            noise_scale: 0.0,
            seed: 3,
        };
        let (sample, _) = simulate(&spec, 300).unwrap();
        let input = dir.path().join("in.csv");
        write_sample(&input, &sample).unwrap();
        let mut cfg = RunConfig::defaults(Mode::Estimate);
        cfg.input = Some(input);
        cfg.output = dir.path().join("out.csv");
        let out = run(&cfg).unwrap();

        let text = std::fs::read_to_string(&out.csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("epsilon,f_hat"));
        let pts: Vec<(f64, f64)> = lines
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.sidecar.unwrap()).unwrap()).unwrap();
        let b1 = meta["b1"].as_f64().unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().filter(|(e, _)| e.abs() <= 2.0 * b1).unzip();
        assert!((trapezoid(&x, &y) - 1.0).abs() < 1e-3);
        let kept = meta["n_trimmed_in"].as_u64().unwrap();
        assert!((200..=280).contains(&kept), "{kept}");
        assert_eq!(meta["config"]["b1"].as_str().unwrap(), b1.to_string());
        assert!(meta["a11"]["flag"].is_string());
    }

    #[test]
    fn sidecar_name_appends_suffix() {
        assert_eq!(sidecar_path(Path::new("a/b.csv"), ".meta.json"), PathBuf::from("a/b.csv.meta.json"));
    }
}
