//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p errdens-core --test acceptance --release`.

use std::process::ExitCode;
use std::time::Instant;

use errdens_core::bandwidth::{amse_b1, b0_star, b1_star_rate, rn_argmin_numeric, rn_risk};
use errdens_core::cli_io::{run, Mode, RunConfig};
use errdens_core::errdensity::{naive_conditional_density, two_step_density};
use errdens_core::kernels::{eval_k0, eval_k1, KernelSpec};
use errdens_core::montecarlo::stats::loglog_slope;
use errdens_core::montecarlo::{
    curse_contrast, density_study, normality_experiment, BandwidthRule, DensityStudyConfig,
    ErrorFamily, ExperimentKind, GFamily, MFamily, ModelSpec,
};
use errdens_core::quadrature::simpson;
use errdens_core::regression::{g_hat, nw_estimate, nw_loo, residuals, Sample, TrimRegion};
use errdens_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn base_model(d: usize) -> ModelSpec {
    ModelSpec {
        d,
        m_family: MFamily::SineProduct,
        g_family: GFamily::UniformBox,
        f_family: ErrorFamily::StdNormal,
        noise_scale: 1.0,
        seed: 20261016,
    }
}

fn kernel_suite() -> Outcome {
    let k0 = KernelSpec::k0(1).unwrap();
    let k0f = |u: f64| eval_k0(&[u], &k0).unwrap();
    let k1f = |v: f64| eval_k1(v, 0).unwrap();
    let m = [
        simpson(k0f, -0.5, 0.5, 2048) - 1.0,
        simpson(|u| u * k0f(u), -0.5, 0.5, 2048),
        simpson(k1f, -1.0, 1.0, 2048) - 1.0,
        simpson(|v| v * k1f(v), -1.0, 1.0, 2048),
    ];
    let moments_ok = m.iter().all(|e| e.abs() < 1e-8);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let v: f64 = rng.random_range(-0.95..0.95);
        for order in 1..=3u32 {
            let fd = (eval_k1(v + h, order - 1).unwrap() - eval_k1(v - h, order - 1).unwrap()) / (2.0 * h);
            let exact = eval_k1(v, order).unwrap();
            worst = worst.max((fd - exact).abs() / exact.abs().max(1e-2));
        }
    }
    let ends = eval_k1(1.0, 3).unwrap() == 0.0 && eval_k1(-1.0, 3).unwrap() == 0.0;
    outcome(
        moments_ok && worst < 1e-5 && ends,
        format!("moment errors {:.1e} {:.1e} {:.1e} {:.1e}; worst FD rel error {worst:.2e}; K1'''(±1)=0: {ends}", m[0], m[1], m[2], m[3]),
    )
}

// Direct-sum references, written independently of the library internals.
fn k0_ref(u: &[f64]) -> f64 {
    u.iter()
        .map(|&t| if t.abs() <= 0.5 { 1.5 * (1.0 - 4.0 * t * t) } else { 0.0 })
        .product()
}

fn k1_ref(v: f64) -> f64 {
    if v.abs() < 1.0 {
        315.0 / 256.0 * (1.0 - v * v).powi(4)
    } else {
        0.0
    }
}

fn scaled(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y) / h).collect()
}

fn nw_ref(xs: &[Vec<f64>], ys: &[f64], b0: f64, x: &[f64], skip: Option<usize>) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (j, (xj, yj)) in xs.iter().zip(ys).enumerate() {
        if Some(j) == skip {
            continue;
        }
        let w = k0_ref(&scaled(xj, x, b0));
        num += w * yj;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for inst in 0..200 {
        let n = rng.random_range(5..=50);
        let d = rng.random_range(1..=3);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let sample = Sample::from_rows(&xs, ys.clone()).unwrap();
        let b0 = rng.random_range(0.3..1.2);
        let b1 = rng.random_range(0.2..1.0);
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let nf = n as f64;

        let g_ref: f64 = xs.iter().map(|xj| k0_ref(&scaled(xj, &x, b0))).sum::<f64>() / (nf * b0.powi(d as i32));
        if !close(g_hat(&sample, b0, &x).unwrap(), g_ref) {
            failures.push(format!("g_hat #{inst}"));
        }
        match (nw_estimate(&sample, b0, &x), nw_ref(&xs, &ys, b0, &x, None)) {
            (Ok(a), Some(b)) if close(a, b) => {}
            (Err(Error::EmptyNeighborhood), None) => {}
            _ => failures.push(format!("nw_estimate #{inst}")),
        }
        let i = rng.random_range(0..n);
        match (nw_loo(&sample, b0, i), nw_ref(&xs, &ys, b0, &xs[i], Some(i))) {
            (Ok(a), Some(b)) if close(a, b) => {}
            (Err(Error::EmptyNeighborhood), None) => {}
            _ => failures.push(format!("nw_loo #{inst}")),
        }

        let grid: Vec<f64> = (0..7).map(|k| -1.5 + 0.5 * k as f64).collect();
        let trim = TrimRegion::new(vec![0.1; d], vec![0.9; d]).unwrap();
        let used: Vec<f64> = (0..n)
            .filter(|&j| xs[j].iter().all(|&v| (0.1..=0.9).contains(&v)))
            .filter_map(|j| nw_ref(&xs, &ys, b0, &xs[j], Some(j)).map(|m| ys[j] - m))
            .collect();
        match residuals(&sample, b0, &trim) {
            Ok(res) => {
                let est = two_step_density(&res, b1, &grid).unwrap();
                let ok = grid.iter().zip(&est.values).all(|(&e, &v)| {
                    let r = used.iter().map(|u| k1_ref((e - u) / b1)).sum::<f64>() / (used.len() as f64 * b1);
                    close(v, r)
                });
                if !ok {
                    failures.push(format!("two_step_density #{inst}"));
                }
            }
            Err(Error::AllTrimmed) if used.is_empty() => {}
            Err(_) => failures.push(format!("residuals #{inst}")),
        }

        let h0 = rng.random_range(0.3..1.2);
        let h1 = rng.random_range(0.2..1.0);
        let w: Vec<f64> = xs.iter().map(|xj| k0_ref(&scaled(xj, &x, h0))).collect();
        let wsum: f64 = w.iter().sum();
        match (naive_conditional_density(&sample, b0, h0, h1, &x, &grid), nw_ref(&xs, &ys, b0, &x, None)) {
            (Ok(est), Some(m)) if wsum > 0.0 => {
                let ok = grid.iter().zip(&est.values).all(|(&e, &v)| {
                    let num: f64 = w.iter().zip(&ys).map(|(wj, yj)| wj * k1_ref((yj - m - e) / h1)).sum();
                    close(v, num / (h1 * wsum))
                });
                if !ok {
                    failures.push(format!("naive_conditional_density #{inst}"));
                }
            }
            (Err(Error::EmptyNeighborhood), m) if m.is_none() || wsum == 0.0 => {}
            _ => failures.push(format!("naive_conditional_density #{inst} (error mismatch)")),
        }
    }
    outcome(
        failures.is_empty(),
        format!("200 instances, {} mismatches {:?}", failures.len(), &failures[..failures.len().min(5)]),
    )
}

fn argmin_crosscheck() -> Outcome {
    let mut worst: f64 = 1.0;
    let mut bad = Vec::new();
    for n in [1_000usize, 10_000, 100_000, 1_000_000] {
        for d in 1..=3usize {
            let nf = n as f64;
            for b1 in [nf.powf(-0.2), nf.powf(-3.0 / (2.0 * d as f64 + 11.0))] {
                let r = rn_argmin_numeric(n, d, b1) / b0_star(n, d, b1, 1.0);
                let f = r.max(1.0 / r);
                worst = worst.max(f);
                if f > 3.0 {
                    bad.push(format!("n={n} d={d} b1={b1:.4}: ratio {r:.3}"));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("worst factor {worst:.3}; failures {bad:?}"))
}

fn risk_slopes() -> Outcome {
    let ns = [1e3, 1e4, 1e5, 1e6];
    let mut parts = Vec::new();
    let mut all = true;
    for d in 1..=4usize {
        let target = if d <= 2 { -0.4 } else { -6.0 / (2.0 * d as f64 + 11.0) };
        let risk: Vec<f64> = ns
            .iter()
            .map(|&nf| {
                let n = nf as usize;
                let b1: f64 = b1_star_rate(n, d, 1.0);
                let b0 = b0_star(n, d, b1, 1.0);
                (amse_b1(b1, n) + rn_risk(b0, b1, n, d)).sqrt()
            })
            .collect();
        let s = loglog_slope("risk", &ns, &risk).slope;
        let ok = (s - target).abs() <= 0.02;
        all &= ok;
        parts.push(format!("d={d}: {s:.4} vs {target:.4} {}", if ok { "ok" } else { "off" }));
    }
    outcome(all, parts.join("; "))
}

fn study_config(spec: &ModelSpec) -> DensityStudyConfig {
    DensityStudyConfig::new(spec, vec![250, 500, 1000, 2000, 4000], 200)
}

fn rate_and_gap() -> (Outcome, Outcome) {
    let spec = base_model(1);
    let report = density_study(&spec, &study_config(&spec), ExperimentKind::Rate).unwrap();
    let slope = report.slope("feasible_sqrt_ise").unwrap();
    let oracle = report.slope("oracle_sqrt_ise").unwrap();
    let rate = outcome(
        (-0.50..=-0.30).contains(&slope.slope),
        format!(
            "median sqrt(ISE) slope {:.4} (se {:.4}); oracle slope {:.4}",
            slope.slope, slope.std_error, oracle.slope
        ),
    );
    let dec = report.check("gap_median_strictly_decreasing").unwrap();
    let below = report.check("gap_below_oracle_error_at_max_n").unwrap();
    let gap = outcome(dec.passed && below.passed, format!("{}; {}", dec.detail, below.detail));
    (rate, gap)
}

fn normality() -> Outcome {
    let spec = base_model(1);
    let r = normality_experiment(&spec, 2000, 500, 0.0, BandwidthRule::default()).unwrap();
    let s = r.normality.unwrap();
    outcome(
        s.ks_distance < 0.08 && (0.75..=1.25).contains(&s.variance_ratio),
        format!(
            "KS {:.4} (theory-centred {:.4}); variance {:.4} vs {:.4} (ratio {:.3}); b1 {:.4}",
            s.ks_distance, s.ks_distance_theory, s.variance_empirical, s.variance_theory, s.variance_ratio, s.b1
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut all = true;
    for mode in [Mode::Rate, Mode::Normality, Mode::Supnorm, Mode::Contrast] {
        let mut cfg = RunConfig::defaults(mode);
        cfg.output = dir.path().join(format!("{}.csv", mode.name()));
        cfg.seed = 77;
        cfg.n_grid = vec![100, 150, 200, 250];
        cfg.n = 200;
        cfg.reps = match mode {
            Mode::Normality => 300,
            Mode::Rate => 50,
            _ => 10,
        };
        if mode == Mode::Contrast {
            cfg.d = 2;
        }
        let read = |p: &std::path::Path| std::fs::read(p).unwrap();
        let first = run(&cfg).unwrap();
        let (a, sa) = (read(&first.csv), read(first.sidecar.as_ref().unwrap()));
        let second = run(&cfg).unwrap();
        let (b, sb) = (read(&second.csv), read(second.sidecar.as_ref().unwrap()));
        let same = a == b && sa == sb;
        all &= same;
        details.push(format!("{}: {}", mode.name(), if same { "identical" } else { "DIFFER" }));
    }
    outcome(all, details.join("; "))
}

fn curse_of_dimensionality() -> Outcome {
    let spec = base_model(2);
    let r = curse_contrast(&spec, 2000, 200, &[0.5, 0.5], 0.0, BandwidthRule::default()).unwrap();
    let c = r.contrast.unwrap();
    outcome(
        c.ratio >= 1.5,
        format!(
            "RMSE naive {:.5} vs two-step {:.5} (ratio {:.3}, h {:.4})",
            c.rmse_naive, c.rmse_two_step, c.ratio, c.h
        ),
    )
}

fn report(id: u32, name: &str, started: Instant, o: &Outcome, failed: &mut u32) {
    let tag = if o.passed { "PASS" } else { "FAIL" };
    if !o.passed {
        *failed += 1;
    }
    println!(
        "criterion {id} [{tag}] {name} ({:.1}s): {}",
        started.elapsed().as_secs_f64(),
        o.detail
    );
}

fn main() -> ExitCode {
    let mut failed = 0;
    let t = Instant::now();
    report(1, "kernel assumptions", t, &kernel_suite(), &mut failed);
    let t = Instant::now();
    report(2, "oracle equivalence", t, &oracle_equivalence(), &mut failed);
    let t = Instant::now();
    report(3, "numeric b0 argmin vs closed form", t, &argmin_crosscheck(), &mut failed);
    let t = Instant::now();
    report(4, "risk slopes at (b0*, b1*)", t, &risk_slopes(), &mut failed);
    let t = Instant::now();
    let (rate, gap) = rate_and_gap();
    report(5, "Monte Carlo rate", t, &rate, &mut failed);
    report(6, "feasible/oracle gap", t, &gap, &mut failed);
    let t = Instant::now();
    report(7, "asymptotic normality", t, &normality(), &mut failed);
    let t = Instant::now();
    report(8, "determinism", t, &determinism(), &mut failed);
    let t = Instant::now();
    report(9, "curse-of-dimensionality contrast", t, &curse_of_dimensionality(), &mut failed);
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
