use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kinkscan::estimator::{estimate, FMode};
use kinkscan::experiments::{
    run_clt_study, run_null_calibration, run_rate_study, target_rate_slope, BandwidthRule,
    ConfigTemplate,
};
use kinkscan::kernel::{build_kernel, verify_kernel};
use kinkscan::scenario::generate_dataset;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{dataset_csv, fmt_float, provenance_line, read_dataset, write_atomic};
use crate::svg::profile_plot;

/// Exit status: success or kink found.
pub const EXIT_OK: i32 = 0;
/// Exit status: clean negative (no kink, failed check).
pub const EXIT_NEGATIVE: i32 = 1;
/// Exit status: usage, parse, I/O or numerical error.
pub const EXIT_ERROR: i32 = 2;

/// Command output: text for stdout and the exit status.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn new(stdout: String, code: i32) -> Self {
        Self { stdout, code }
    }
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunConfig::parse(&text)
}

pub fn kernel(order: i64, verify: bool, table: Option<f64>) -> CliResult<Outcome> {
    let kernel = build_kernel(order)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# kernel order {} (smoothness {}), K(x) = sum_j c_j x^j on [-1, 1]",
        kernel.order(),
        kernel.smoothness()
    );
    let _ = writeln!(out, "# normalizer {}", kernel.normalizer());
    for (exponent, c) in kernel.poly_coeffs() {
        let _ = writeln!(out, "# c_{exponent} = {c}");
    }
    let mut code = EXIT_OK;
    if verify {
        let report = verify_kernel(&kernel, 1e-12);
        for c in &report.checks {
            let _ = writeln!(
                out,
                "# {:<16} {:>24} {}",
                c.name,
                format!("{:e}", c.value),
                if c.pass { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "# verification {}",
            if report.pass { "passed" } else { "failed" }
        );
        if !report.pass {
            code = EXIT_NEGATIVE;
        }
    }
    if let Some(step) = table {
        if !(step > 0.0 && step <= 2.0) {
            return Err(CliError::Usage(format!("table step {step} not in (0, 2]")));
        }
        let count = (2.0 / step + 1e-9).floor() as usize;
        out.push_str("x,K,K1,K2,K3\n");
        for i in 0..=count {
            let x = (-1.0 + i as f64 * step).min(1.0);
            let row: Vec<String> = (0..=3)
                .map(|d| kernel.eval(d, x).map(fmt_float))
                .collect::<Result<_, _>>()?;
            let _ = writeln!(out, "{},{}", fmt_float(x), row.join(","));
        }
    }
    Ok(Outcome::new(out, code))
}

pub fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> CliResult<Outcome> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let scenario = cfg.scenario()?;
    let data = generate_dataset::<f64>(&scenario, cfg.simulate.n, cfg.seed, cfg.simulate.latents)?;
    let text = dataset_csv(&data, &provenance_line(cfg.seed, &cfg.sha256()));
    write_atomic(out, text.as_bytes())?;
    Ok(Outcome::new(
        format!("wrote {} rows to {}\n", data.n(), out.display()),
        EXIT_OK,
    ))
}

pub struct EstimateArgs {
    pub data: PathBuf,
    pub bandwidth: Option<BandwidthRule>,
    pub bandwidth_zero: Option<BandwidthRule>,
    pub f_mode: Option<FMode>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

pub fn estimate_cmd(args: &EstimateArgs) -> CliResult<Outcome> {
    let mut data = read_dataset(&args.data)?;
    let mut template = ConfigTemplate::default();
    if let Some(path) = &args.config {
        let cfg = load_config(path)?;
        template = cfg.estimator;
        data = data.with_scenario(cfg.scenario()?);
    }
    if let Some(rule) = args.bandwidth {
        template.detect = rule;
    }
    if let Some(rule) = args.bandwidth_zero {
        template.zero = rule;
    }
    if let Some(mode) = args.f_mode {
        template.f_mode = mode;
    }
    let config = template.for_n(data.n())?;
    let result = estimate(&data, &config)?;
    let report = serde_json::to_string_pretty(&result.report()).expect("report serializes");
    if let Some(path) = &args.svg {
        let markers: Vec<f64> = result.kinks.iter().map(|k| k.lambda_hat).collect();
        let svg = profile_plot(
            &result.profile.grid,
            &result.profile.kappa_hat,
            &markers,
            &format!("kappa-hat, h = {:.4}", result.bandwidth_detect),
        );
        write_atomic(path, svg.as_bytes())?;
    }
    let stdout = match &args.out {
        Some(path) => {
            write_atomic(path, format!("{report}\n").as_bytes())?;
            format!("{} kink(s); wrote {}\n", result.kinks.len(), path.display())
        }
        None => format!("{report}\n"),
    };
    let code = if result.kinks.is_empty() {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    };
    Ok(Outcome::new(stdout, code))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McKind {
    Rate,
    Null,
    Clt,
}

impl McKind {
    pub fn name(self) -> &'static str {
        match self {
            McKind::Rate => "rate",
            McKind::Null => "null",
            McKind::Clt => "clt",
        }
    }
}

fn write_outputs(
    dir: &Path,
    kind: McKind,
    csv: &str,
    summary: &serde_json::Value,
) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_atomic(
        &dir.join(format!("{}_reps.csv", kind.name())),
        csv.as_bytes(),
    )?;
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    write_atomic(
        &dir.join(format!("{}_summary.json", kind.name())),
        format!("{text}\n").as_bytes(),
    )
}

pub fn mc(kind: McKind, config: &Path, out_dir: &Path, seed: Option<u64>) -> CliResult<Outcome> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let scenario = cfg.scenario()?;
    let hash = cfg.sha256();
    let mut csv = provenance_line(cfg.seed, &hash);
    let mut log = String::new();
    let m = &cfg.mc;
    let (summary, pass) = match kind {
        McKind::Rate => {
            let r = run_rate_study(&scenario, &m.n_list, m.reps, &cfg.estimator, cfg.seed)?;
            let target = target_rate_slope(&scenario, 2 * cfg.estimator.kernel_order + 1);
            let lo = m.slope_min.unwrap_or(target - 0.15);
            let hi = m.slope_max.unwrap_or(target + 0.15);
            let pass = r.slope >= lo && r.slope <= hi;
            csv.push_str("n,rep,seed,error,theta_hat,missed\n");
            for rep in &r.replications {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    rep.n,
                    rep.rep,
                    rep.seed,
                    fmt_float(rep.error),
                    rep.theta_hat.map(fmt_float).unwrap_or_default(),
                    rep.missed
                );
            }
            for l in &r.levels {
                let _ = writeln!(
                    log,
                    "rate n={} median={:.5} quartiles=({:.5}, {:.5}) misses={}",
                    l.n, l.median, l.lower_quartile, l.upper_quartile, l.misses
                );
            }
            let _ = writeln!(
                log,
                "rate slope={:.4} band=[{lo}, {hi}] target={target:.4}",
                r.slope
            );
            let summary = json!({
                "study": "rate",
                "master_seed": cfg.seed,
                "config_sha256": hash,
                "reps": r.reps,
                "levels": r.levels,
                "slope": r.slope,
                "intercept": r.intercept,
                "target_slope": r.target_slope,
                "slope_min": lo,
                "slope_max": hi,
                "censor_value": r.censor_value,
                "pass": pass,
            });
            (summary, pass)
        }
        McKind::Null => {
            let config = cfg.estimator.for_n(m.n)?;
            let r =
                run_null_calibration(&scenario, m.n, m.reps, &config, &m.gumbel_points, cfg.seed)?;
            let calibration_pass = r.points.iter().all(|p| p.gap() <= m.gumbel_tolerance);
            let false_alarm_pass = r.false_alarm_rate <= m.false_alarm_max;
            csv.push_str("rep,sup_stat\n");
            for (i, v) in r.sup_stats.iter().enumerate() {
                let _ = writeln!(csv, "{i},{}", fmt_float(*v));
            }
            for p in &r.points {
                let _ = writeln!(
                    log,
                    "null x={} bound={:.4} empirical={:.4} gumbel={:.4} gap={:.4}",
                    p.x,
                    p.bound,
                    p.empirical,
                    p.theoretical,
                    p.gap()
                );
            }
            let _ = writeln!(log, "null false_alarm_rate={:.4}", r.false_alarm_rate);
            let points: Vec<_> = r
                .points
                .iter()
                .map(|p| {
                    json!({
                        "x": p.x,
                        "bound": p.bound,
                        "empirical": p.empirical,
                        "theoretical": p.theoretical,
                        "gap": p.gap(),
                    })
                })
                .collect();
            let summary = json!({
                "study": "null",
                "master_seed": cfg.seed,
                "config_sha256": hash,
                "n": r.n,
                "reps": r.reps,
                "bandwidth": r.bandwidth,
                "m_n": r.m_n,
                "scan_points": r.scan_points,
                "threshold": r.threshold,
                "points": points,
                "gumbel_tolerance": m.gumbel_tolerance,
                "calibration_pass": calibration_pass,
                "false_alarm_rate": r.false_alarm_rate,
                "false_alarm_max": m.false_alarm_max,
                "false_alarm_pass": false_alarm_pass,
                "warnings": r.warnings,
                "pass": calibration_pass && false_alarm_pass,
            });
            (summary, calibration_pass && false_alarm_pass)
        }
        McKind::Clt => {
            let config = cfg.estimator.for_n(m.n)?;
            let r = run_clt_study(&scenario, m.t, m.n, m.reps, m.regime, &config, cfg.seed)?;
            let pass = r.ks_distance <= m.ks_max;
            csv.push_str("rep,value\n");
            for (i, v) in r.values.iter().enumerate() {
                let _ = writeln!(csv, "{i},{}", fmt_float(*v));
            }
            let _ = writeln!(
                log,
                "clt regime={:?} ks={:.4} target_variance={:.4} sample_variance={:.4}",
                r.regime, r.ks_distance, r.target_variance, r.sample_variance
            );
            let summary = json!({
                "study": "clt",
                "master_seed": cfg.seed,
                "config_sha256": hash,
                "regime": r.regime,
                "n": r.n,
                "t": r.t,
                "bandwidth": r.bandwidth,
                "reps": r.reps,
                "kappa_true": r.kappa_true,
                "norming": r.norming,
                "target_variance": r.target_variance,
                "target_source": r.target_source,
                "sample_variance": r.sample_variance,
                "ks_distance": r.ks_distance,
                "ks_max": m.ks_max,
                "pass": pass,
            });
            (summary, pass)
        }
    };
    write_outputs(out_dir, kind, &csv, &summary)?;
    let code = if pass { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::new(log, code))
}
