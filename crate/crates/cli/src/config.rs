//! Flat `section.key = value` run configuration.
//!
//! Parsing is strict: unknown or repeated keys are errors, and
//! `design.assumption` is the only required key. [`RunConfig::to_text`]
//! writes every key, so parse → serialize → parse is the identity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use kinkscan::estimator::{FMode, UpsilonMode};
use kinkscan::experiments::{BandwidthRule, CltRegime, ConfigTemplate};
use kinkscan::lrd::{Innovations, LinearProcessSpec, SlowlyVarying, Truncation};
use kinkscan::scenario::{
    DesignLaw, DesignSpec, ErrorLaw, Kink, KinkFunction, ScaleSpec, Scenario, SmoothPart,
};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

const KEYS: &[&str] = &[
    "run.seed",
    "design.assumption",
    "design.law",
    "design.alpha",
    "design.mean",
    "design.truncation",
    "design.innovations",
    "design.slowly_varying",
    "design.errors",
    "mu.kinks",
    "mu.smooth",
    "mu.smoothness",
    "sigma.scale",
    "sigma.smoothness",
    "simulate.n",
    "simulate.latents",
    "estimator.kernel_order",
    "estimator.bandwidth_detect",
    "estimator.bandwidth_zero",
    "estimator.f_mode",
    "estimator.upsilon_mode",
    "estimator.coarse_step",
    "estimator.fine_exponent",
    "estimator.threshold_inflation",
    "estimator.scan_refine",
    "mc.n_list",
    "mc.n",
    "mc.reps",
    "mc.t",
    "mc.regime",
    "mc.gumbel_points",
    "mc.slope_min",
    "mc.slope_max",
    "mc.gumbel_tolerance",
    "mc.false_alarm_max",
    "mc.ks_max",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// i.i.d. design with LRD errors.
    A,
    /// LRD Gaussian design with i.i.d. errors.
    B,
}

/// The dependent process is the error sequence under (A) and the design
/// under (B); `law` applies only to (A) and `errors` only to (B).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSection {
    pub assumption: Assumption,
    pub law: DesignLaw,
    pub alpha: f64,
    pub mean: f64,
    pub truncation: Truncation,
    pub innovations: Innovations,
    pub slowly_varying: f64,
    pub errors: ErrorLaw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuSection {
    pub kinks: Vec<Kink>,
    pub smooth: SmoothPart,
    pub smoothness: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSection {
    pub scale: ScaleSpec,
    pub smoothness: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSection {
    pub n: usize,
    pub latents: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSection {
    pub n_list: Vec<usize>,
    pub n: usize,
    pub reps: usize,
    pub t: f64,
    pub regime: CltRegime,
    pub gumbel_points: Vec<f64>,
    /// `None`: target slope minus 0.15.
    pub slope_min: Option<f64>,
    /// `None`: target slope plus 0.15.
    pub slope_max: Option<f64>,
    pub gumbel_tolerance: f64,
    pub false_alarm_max: f64,
    pub ks_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub design: DesignSection,
    pub mu: MuSection,
    pub sigma: SigmaSection,
    pub simulate: SimulateSection,
    pub estimator: ConfigTemplate,
    pub mc: McSection,
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn take<T>(
        &mut self,
        key: &str,
        default: T,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> CliResult<T> {
        match self.map.remove(key) {
            None => Ok(default),
            Some((value, line)) => parse(&value).map_err(|message| CliError::ConfigLine {
                line,
                message: format!("{key}: {message}"),
            }),
        }
    }

    fn reject(&mut self, key: &str, why: &str) -> CliResult<()> {
        match self.map.remove(key) {
            Some((_, line)) => Err(CliError::ConfigLine {
                line,
                message: format!("{key} {why}"),
            }),
            None => Ok(()),
        }
    }
}

fn number<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse()
        .map_err(|_| format!("cannot parse '{s}' as a number"))
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = number(s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{s}'")),
    }
}

fn float_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| finite(p.trim())).collect()
}

/// Splits `name(a, b, ...)` into the name and its numeric arguments.
fn call(s: &str) -> Result<(&str, Vec<f64>), String> {
    match s.split_once('(') {
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("missing ')' in '{s}'"))?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                float_list(inner)?
            };
            Ok((name.trim(), args))
        }
        None => Ok((s, Vec::new())),
    }
}

fn arity(name: &str, args: &[f64], n: usize) -> Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("{name} takes {n} arguments, got {}", args.len()))
    }
}

fn parse_assumption(s: &str) -> Result<Assumption, String> {
    match s {
        "A" | "a" => Ok(Assumption::A),
        "B" | "b" => Ok(Assumption::B),
        _ => Err(format!("expected A or B, got '{s}'")),
    }
}

fn parse_law(s: &str) -> Result<DesignLaw, String> {
    match call(s)? {
        ("uniform", a) if a.is_empty() => Ok(DesignLaw::Uniform01),
        ("beta", a) => {
            arity("beta", &a, 2)?;
            Ok(DesignLaw::Beta { p: a[0], q: a[1] })
        }
        _ => Err(format!("expected uniform or beta(p, q), got '{s}'")),
    }
}

fn parse_truncation(s: &str) -> Result<Truncation, String> {
    if s == "auto" {
        Ok(Truncation::Auto)
    } else {
        number(s).map(Truncation::Fixed)
    }
}

fn parse_innovations(s: &str) -> Result<Innovations, String> {
    match s {
        "gaussian" => Ok(Innovations::Gaussian),
        "uniform" => Ok(Innovations::Uniform),
        _ => Err(format!("expected gaussian or uniform, got '{s}'")),
    }
}

fn parse_slowly_varying(s: &str) -> Result<f64, String> {
    match call(s)? {
        ("constant", a) => {
            arity("constant", &a, 1)?;
            Ok(a[0])
        }
        _ => Err(format!("expected constant(c), got '{s}'")),
    }
}

fn parse_errors(s: &str) -> Result<ErrorLaw, String> {
    match call(s)? {
        ("gaussian", a) => {
            arity("gaussian", &a, 1)?;
            Ok(ErrorLaw::Gaussian { variance: a[0] })
        }
        ("uniform", a) if a.is_empty() => Ok(ErrorLaw::Uniform),
        _ => Err(format!("expected gaussian(variance) or uniform, got '{s}'")),
    }
}

fn parse_kinks(s: &str) -> Result<Vec<Kink>, String> {
    if s == "none" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (theta, jump) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("expected theta:jump, got '{}'", item.trim()))?;
            Ok(Kink {
                theta: finite(theta.trim())?,
                jump: finite(jump.trim())?,
            })
        })
        .collect()
}

fn parse_smooth(s: &str) -> Result<SmoothPart, String> {
    match call(s)? {
        ("zero", a) if a.is_empty() => Ok(SmoothPart::Zero),
        ("sine", a) => {
            arity("sine", &a, 2)?;
            Ok(SmoothPart::Sine {
                amplitude: a[0],
                frequency: a[1],
            })
        }
        ("polynomial", a) if !a.is_empty() => Ok(SmoothPart::Polynomial(a)),
        _ => Err(format!(
            "expected zero, sine(amplitude, frequency) or polynomial(c0, c1, ...), got '{s}'"
        )),
    }
}

fn parse_scale(s: &str) -> Result<ScaleSpec, String> {
    match call(s)? {
        ("constant", a) => {
            arity("constant", &a, 1)?;
            Ok(ScaleSpec::Constant(a[0]))
        }
        ("sine", a) => {
            arity("sine", &a, 3)?;
            Ok(ScaleSpec::SineBounded {
                base: a[0],
                amplitude: a[1],
                frequency: a[2],
            })
        }
        _ => Err(format!(
            "expected constant(v) or sine(base, amplitude, frequency), got '{s}'"
        )),
    }
}

pub fn parse_bandwidth(s: &str) -> Result<BandwidthRule, String> {
    match call(s)? {
        ("auto", a) if a.is_empty() => Ok(BandwidthRule::Auto),
        ("scaled", a) => {
            arity("scaled", &a, 1)?;
            Ok(BandwidthRule::Scaled(a[0]))
        }
        _ => finite(s).map(BandwidthRule::Fixed),
    }
}

pub fn parse_f_mode(s: &str) -> Result<FMode, String> {
    match s {
        "ranks" => Ok(FMode::Ranks),
        "oracle" => Ok(FMode::Oracle),
        _ => Err(format!("expected ranks or oracle, got '{s}'")),
    }
}

fn parse_upsilon_mode(s: &str) -> Result<UpsilonMode, String> {
    match s {
        "plugin" => Ok(UpsilonMode::Plugin),
        "oracle" => Ok(UpsilonMode::Oracle),
        _ => Err(format!("expected plugin or oracle, got '{s}'")),
    }
}

fn auto_or(s: &str) -> Result<Option<f64>, String> {
    if s == "auto" {
        Ok(None)
    } else {
        finite(s).map(Some)
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn fmt_bandwidth(rule: BandwidthRule) -> String {
    match rule {
        BandwidthRule::Auto => "auto".into(),
        BandwidthRule::Fixed(h) => format!("{h}"),
        BandwidthRule::Scaled(c) => format!("scaled({c})"),
    }
}

fn fmt_auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".into(), |x| format!("{x}"))
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_list: (10..=14).map(|e| 1usize << e).collect(),
            n: 8192,
            reps: 200,
            t: 0.5,
            regime: CltRegime::A1,
            gumbel_points: vec![-1.0, 0.0, 1.0, 2.0],
            slope_min: None,
            slope_max: None,
            gumbel_tolerance: 0.12,
            false_alarm_max: 0.10,
            ks_max: 0.08,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::ConfigLine {
                    line,
                    message: format!("expected 'section.key = value', got '{content}'"),
                })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::ConfigLine {
                    line,
                    message: format!("unknown key '{key}'"),
                });
            }
            if let Some((_, first)) = map.get(key) {
                return Err(CliError::ConfigLine {
                    line,
                    message: format!("duplicate key '{key}' (first set on line {first})"),
                });
            }
            map.insert(key.to_string(), (value.to_string(), line));
        }
        let mut e = Entries { map };
        let assumption = match e.map.get("design.assumption") {
            Some(_) => e.take("design.assumption", Assumption::A, parse_assumption)?,
            None => {
                return Err(CliError::Config(
                    "missing required key 'design.assumption'".into(),
                ))
            }
        };
        let (law, errors) = match assumption {
            Assumption::A => {
                e.reject("design.errors", "applies only to assumption B")?;
                (
                    e.take("design.law", DesignLaw::Uniform01, parse_law)?,
                    ErrorLaw::Gaussian { variance: 1.0 },
                )
            }
            Assumption::B => {
                e.reject("design.law", "applies only to assumption A")?;
                (
                    DesignLaw::Uniform01,
                    e.take(
                        "design.errors",
                        ErrorLaw::Gaussian { variance: 1.0 },
                        parse_errors,
                    )?,
                )
            }
        };
        let design = DesignSection {
            assumption,
            law,
            alpha: e.take("design.alpha", 0.6, finite)?,
            mean: e.take("design.mean", 0.0, finite)?,
            truncation: e.take("design.truncation", Truncation::Auto, parse_truncation)?,
            innovations: e.take(
                "design.innovations",
                Innovations::Gaussian,
                parse_innovations,
            )?,
            slowly_varying: e.take("design.slowly_varying", 1.0, parse_slowly_varying)?,
            errors,
        };
        let mu = MuSection {
            kinks: e.take("mu.kinks", Vec::new(), parse_kinks)?,
            smooth: e.take("mu.smooth", SmoothPart::Zero, parse_smooth)?,
            smoothness: e.take("mu.smoothness", 3, number)?,
        };
        let sigma = SigmaSection {
            scale: e.take("sigma.scale", ScaleSpec::Constant(1.0), parse_scale)?,
            smoothness: e.take("sigma.smoothness", 3, number)?,
        };
        let simulate = SimulateSection {
            n: e.take("simulate.n", 2048, number)?,
            latents: e.take("simulate.latents", false, boolean)?,
        };
        let d = ConfigTemplate::default();
        let estimator = ConfigTemplate {
            kernel_order: e.take("estimator.kernel_order", d.kernel_order, number)?,
            detect: e.take("estimator.bandwidth_detect", d.detect, parse_bandwidth)?,
            zero: e.take("estimator.bandwidth_zero", d.zero, parse_bandwidth)?,
            f_mode: e.take("estimator.f_mode", d.f_mode, parse_f_mode)?,
            upsilon_mode: e.take("estimator.upsilon_mode", d.upsilon_mode, parse_upsilon_mode)?,
            coarse_step: e.take("estimator.coarse_step", d.coarse_step, finite)?,
            fine_exponent: e.take("estimator.fine_exponent", d.fine_exponent, auto_or)?,
            threshold_inflation: e.take(
                "estimator.threshold_inflation",
                d.threshold_inflation,
                finite,
            )?,
            scan_refine: e.take("estimator.scan_refine", d.scan_refine, number)?,
        };
        let m = McSection::default();
        let mc = McSection {
            n_list: e.take("mc.n_list", m.n_list, |s| {
                s.split(',').map(|p| number(p.trim())).collect()
            })?,
            n: e.take("mc.n", m.n, number)?,
            reps: e.take("mc.reps", m.reps, number)?,
            t: e.take("mc.t", m.t, finite)?,
            regime: e.take("mc.regime", m.regime, |s| {
                CltRegime::parse(s).map_err(|err| err.to_string())
            })?,
            gumbel_points: e.take("mc.gumbel_points", m.gumbel_points, float_list)?,
            slope_min: e.take("mc.slope_min", m.slope_min, auto_or)?,
            slope_max: e.take("mc.slope_max", m.slope_max, auto_or)?,
            gumbel_tolerance: e.take("mc.gumbel_tolerance", m.gumbel_tolerance, finite)?,
            false_alarm_max: e.take("mc.false_alarm_max", m.false_alarm_max, finite)?,
            ks_max: e.take("mc.ks_max", m.ks_max, finite)?,
        };
        let seed = e.take("run.seed", 0, number)?;
        debug_assert!(e.map.is_empty());
        Ok(Self {
            seed,
            design,
            mu,
            sigma,
            simulate,
            estimator,
            mc,
        })
    }

    /// Canonical text with every key set.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("run.seed", self.seed.to_string());
        let d = &self.design;
        put(
            "design.assumption",
            match d.assumption {
                Assumption::A => "A".into(),
                Assumption::B => "B".into(),
            },
        );
        match d.assumption {
            Assumption::A => put(
                "design.law",
                match d.law {
                    DesignLaw::Uniform01 => "uniform".into(),
                    DesignLaw::Beta { p, q } => format!("beta({p}, {q})"),
                },
            ),
            Assumption::B => put(
                "design.errors",
                match d.errors {
                    ErrorLaw::Gaussian { variance } => format!("gaussian({variance})"),
                    ErrorLaw::Uniform => "uniform".into(),
                },
            ),
        }
        put("design.alpha", format!("{}", d.alpha));
        put("design.mean", format!("{}", d.mean));
        put(
            "design.truncation",
            match d.truncation {
                Truncation::Auto => "auto".into(),
                Truncation::Fixed(m) => m.to_string(),
            },
        );
        put(
            "design.innovations",
            match d.innovations {
                Innovations::Gaussian => "gaussian".into(),
                Innovations::Uniform => "uniform".into(),
            },
        );
        put(
            "design.slowly_varying",
            format!("constant({})", d.slowly_varying),
        );
        put(
            "mu.kinks",
            if self.mu.kinks.is_empty() {
                "none".into()
            } else {
                join(&self.mu.kinks, |k| format!("{}:{}", k.theta, k.jump))
            },
        );
        put(
            "mu.smooth",
            match &self.mu.smooth {
                SmoothPart::Zero => "zero".into(),
                SmoothPart::Sine {
                    amplitude,
                    frequency,
                } => format!("sine({amplitude}, {frequency})"),
                SmoothPart::Polynomial(c) => format!("polynomial({})", join(c, |v| format!("{v}"))),
            },
        );
        put("mu.smoothness", self.mu.smoothness.to_string());
        put(
            "sigma.scale",
            match self.sigma.scale {
                ScaleSpec::Constant(v) => format!("constant({v})"),
                ScaleSpec::SineBounded {
                    base,
                    amplitude,
                    frequency,
                } => format!("sine({base}, {amplitude}, {frequency})"),
            },
        );
        put("sigma.smoothness", self.sigma.smoothness.to_string());
        put("simulate.n", self.simulate.n.to_string());
        put("simulate.latents", self.simulate.latents.to_string());
        let t = &self.estimator;
        put("estimator.kernel_order", t.kernel_order.to_string());
        put("estimator.bandwidth_detect", fmt_bandwidth(t.detect));
        put("estimator.bandwidth_zero", fmt_bandwidth(t.zero));
        put(
            "estimator.f_mode",
            match t.f_mode {
                FMode::Ranks => "ranks".into(),
                FMode::Oracle => "oracle".into(),
            },
        );
        put(
            "estimator.upsilon_mode",
            match t.upsilon_mode {
                UpsilonMode::Plugin => "plugin".into(),
                UpsilonMode::Oracle => "oracle".into(),
            },
        );
        put("estimator.coarse_step", format!("{}", t.coarse_step));
        put("estimator.fine_exponent", fmt_auto(t.fine_exponent));
        put(
            "estimator.threshold_inflation",
            format!("{}", t.threshold_inflation),
        );
        put("estimator.scan_refine", t.scan_refine.to_string());
        let m = &self.mc;
        put("mc.n_list", join(&m.n_list, |n| n.to_string()));
        put("mc.n", m.n.to_string());
        put("mc.reps", m.reps.to_string());
        put("mc.t", format!("{}", m.t));
        put("mc.regime", format!("{:?}", m.regime));
        put(
            "mc.gumbel_points",
            join(&m.gumbel_points, |v| format!("{v}")),
        );
        put("mc.slope_min", fmt_auto(m.slope_min));
        put("mc.slope_max", fmt_auto(m.slope_max));
        put("mc.gumbel_tolerance", format!("{}", m.gumbel_tolerance));
        put("mc.false_alarm_max", format!("{}", m.false_alarm_max));
        put("mc.ks_max", format!("{}", m.ks_max));
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn sha256(&self) -> String {
        Sha256::digest(self.to_text().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        let d = &self.design;
        let process = LinearProcessSpec {
            alpha: d.alpha,
            slowly_varying: SlowlyVarying::Constant(d.slowly_varying),
            mean: d.mean,
            truncation: d.truncation,
            innovations: d.innovations,
        };
        let design = match d.assumption {
            Assumption::A => DesignSpec::A {
                law: d.law,
                errors: process,
            },
            Assumption::B => DesignSpec::B {
                design: process,
                errors: d.errors,
            },
        };
        let mu = KinkFunction::new(
            self.mu.kinks.clone(),
            self.mu.smooth.clone(),
            self.mu.smoothness,
        )?;
        let mut scenario = Scenario::new(mu, self.sigma.scale, design)?;
        scenario.sigma_smoothness = self.sigma.smoothness;
        Ok(scenario)
    }
}
