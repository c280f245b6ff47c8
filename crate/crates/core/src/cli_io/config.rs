//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::montecarlo::{ErrorFamily, GFamily, MFamily, ModelSpec, ResidualSource};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Estimate,
    Rate,
    Gap,
    Normality,
    Supnorm,
    Contrast,
    /// Writes a simulated sample as input CSV.
    Simulate,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "estimate" => Mode::Estimate,
            "rate" => Mode::Rate,
            "gap" => Mode::Gap,
            "normality" => Mode::Normality,
            "supnorm" => Mode::Supnorm,
            "contrast" => Mode::Contrast,
            "simulate" => Mode::Simulate,
            _ => return Err(Error::Config(format!("unknown mode '{s}'"))),
        })
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Estimate => "estimate",
            Mode::Rate => "rate",
            Mode::Gap => "gap",
            Mode::Normality => "normality",
            Mode::Supnorm => "supnorm",
            Mode::Contrast => "contrast",
            Mode::Simulate => "simulate",
        }
    }

    fn default_reps(self) -> usize {
        match self {
            Mode::Normality => 500,
            Mode::Supnorm => 50,
            _ => 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum B1Rule {
    Rate,
    Amise,
}

/// Parsed run configuration. `None` means "auto".
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub seed: u64,
    pub d: usize,
    pub m_family: MFamily,
    pub g_family: GFamily,
    pub f_family: ErrorFamily,
    pub noise_scale: f64,
    pub n_grid: Vec<usize>,
    pub n: usize,
    pub reps: usize,
    pub eps0: f64,
    pub b0: Option<f64>,
    pub b1: Option<f64>,
    pub b1_rule: B1Rule,
    pub c0: f64,
    pub c1: f64,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_count: usize,
    pub trim_lower: Option<Vec<f64>>,
    pub trim_upper: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub residual_source: ResidualSource,
}

pub const KNOWN_KEYS: &[&str] = &[
    "input",
    "output",
    "seed",
    "d",
    "m_family",
    "g_family",
    "f_family",
    "noise_scale",
    "n_grid",
    "n",
    "reps",
    "eps0",
    "b0",
    "b1",
    "b1_rule",
    "c0",
    "c1",
    "grid_min",
    "grid_max",
    "grid_count",
    "trim_lower",
    "trim_upper",
    "x0",
    "residual_source",
];

/// Parses `key = value` lines; `#` starts a comment. Later keys win.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Turns `["--key", "value", ...]` into pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected --key, got '{flag}'")))?;
        let value = it
            .next()
            .ok_or_else(|| Error::Config(format!("missing value for --{key}")))?;
        out.push((key.replace('-', "_"), value.clone()));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: Display,
{
    v.parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse '{v}': {e}")))
}

fn parse_auto<T: FromStr>(key: &str, v: &str) -> Result<Option<T>>
where
    T::Err: Display,
{
    if v == "auto" {
        Ok(None)
    } else {
        parse_num(key, v).map(Some)
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    v.split(',').map(|s| parse_num(key, s.trim())).collect()
}

fn parse_enum<T: for<'de> Deserialize<'de>>(key: &str, v: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(v.to_string()))
        .map_err(|_| Error::Config(format!("{key}: unknown value '{v}'")))
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit enum variants serialize as strings"),
    }
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            input: None,
            output: PathBuf::from(format!("{}.csv", mode.name())),
            seed: 1,
            d: 1,
            m_family: MFamily::SineProduct,
            g_family: GFamily::UniformBox,
            f_family: ErrorFamily::StdNormal,
            noise_scale: 1.0,
            n_grid: vec![250, 500, 1000, 2000, 4000],
            n: 2000,
            reps: mode.default_reps(),
            eps0: 0.0,
            b0: None,
            b1: None,
            b1_rule: B1Rule::Rate,
            c0: 1.0,
            c1: 1.0,
            grid_min: None,
            grid_max: None,
            grid_count: 601,
            trim_lower: None,
            trim_upper: None,
            x0: None,
            residual_source: ResidualSource::Estimated,
        }
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "input" => self.input = Some(PathBuf::from(v)),
            "output" => self.output = PathBuf::from(v),
            "seed" => self.seed = parse_num(key, v)?,
            "d" => self.d = parse_num(key, v)?,
            "m_family" => self.m_family = parse_enum(key, v)?,
            "g_family" => self.g_family = parse_enum(key, v)?,
            "f_family" => self.f_family = parse_enum(key, v)?,
            "noise_scale" => self.noise_scale = parse_num(key, v)?,
            "n_grid" => self.n_grid = parse_list(key, v)?,
            "n" => self.n = parse_num(key, v)?,
            "reps" => self.reps = parse_num(key, v)?,
            "eps0" => self.eps0 = parse_num(key, v)?,
            "b0" => self.b0 = parse_auto(key, v)?,
            "b1" => self.b1 = parse_auto(key, v)?,
            "b1_rule" => self.b1_rule = parse_enum(key, v)?,
            "c0" => self.c0 = parse_num(key, v)?,
            "c1" => self.c1 = parse_num(key, v)?,
            "grid_min" => self.grid_min = parse_auto(key, v)?,
            "grid_max" => self.grid_max = parse_auto(key, v)?,
            "grid_count" => self.grid_count = parse_num(key, v)?,
            "trim_lower" => self.trim_lower = if v == "auto" { None } else { Some(parse_list(key, v)?) },
            "trim_upper" => self.trim_upper = if v == "auto" { None } else { Some(parse_list(key, v)?) },
            "x0" => self.x0 = if v == "auto" { None } else { Some(parse_list(key, v)?) },
            "residual_source" => self.residual_source = parse_enum(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Defaults, then the config file, then overrides.
    pub fn load(mode: Mode, config_path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::defaults(mode);
        if let Some(p) = config_path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            for (k, v) in parse_config_text(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::Estimate && self.input.is_none() {
            return Err(Error::Config("estimate mode requires input".into()));
        }
        if self.mode == Mode::Estimate && self.b1_rule == B1Rule::Amise {
            return Err(Error::Config(
                "b1_rule = amise needs the true error density; use it in simulation modes".into(),
            ));
        }
        if self.grid_count < 2 {
            return Err(Error::Config(format!("grid_count must be >= 2, got {}", self.grid_count)));
        }
        if let (Some(lo), Some(hi)) = (self.grid_min, self.grid_max) {
            if !(lo < hi) {
                return Err(Error::Config(format!("grid_min {lo} must be below grid_max {hi}")));
            }
        }
        if self.trim_lower.is_some() != self.trim_upper.is_some() {
            return Err(Error::Config("trim_lower and trim_upper must be given together".into()));
        }
        if self.mode != Mode::Estimate && self.b0.is_some() != self.b1.is_some() {
            return Err(Error::Config(
                "simulation modes need both b0 and b1 numeric, or both auto".into(),
            ));
        }
        if self.mode != Mode::Estimate {
            self.model().validate()?;
        }
        Ok(())
    }

    pub fn model(&self) -> ModelSpec {
        ModelSpec {
            d: self.d,
            m_family: self.m_family,
            g_family: self.g_family,
            f_family: self.f_family,
            noise_scale: self.noise_scale,
            seed: self.seed,
        }
    }

    /// Every key with its current value, in the file syntax.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let opt = |v: Option<f64>| v.map_or("auto".to_string(), |x| x.to_string());
        let optv = |v: &Option<Vec<f64>>| v.as_ref().map_or("auto".to_string(), |x| join(x));
        let mut m = BTreeMap::new();
        m.insert("mode".into(), self.mode.name().into());
        m.insert(
            "input".into(),
            self.input.as_ref().map_or(String::new(), |p| p.display().to_string()),
        );
        m.insert("output".into(), self.output.display().to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("d".into(), self.d.to_string());
        m.insert("m_family".into(), enum_name(&self.m_family));
        m.insert("g_family".into(), enum_name(&self.g_family));
        m.insert("f_family".into(), enum_name(&self.f_family));
        m.insert("noise_scale".into(), self.noise_scale.to_string());
        m.insert("n_grid".into(), join(&self.n_grid));
        m.insert("n".into(), self.n.to_string());
        m.insert("reps".into(), self.reps.to_string());
        m.insert("eps0".into(), self.eps0.to_string());
        m.insert("b0".into(), opt(self.b0));
        m.insert("b1".into(), opt(self.b1));
        m.insert("b1_rule".into(), enum_name(&self.b1_rule));
        m.insert("c0".into(), self.c0.to_string());
        m.insert("c1".into(), self.c1.to_string());
        m.insert("grid_min".into(), opt(self.grid_min));
        m.insert("grid_max".into(), opt(self.grid_max));
        m.insert("grid_count".into(), self.grid_count.to_string());
        m.insert("trim_lower".into(), optv(&self.trim_lower));
        m.insert("trim_upper".into(), optv(&self.trim_upper));
        m.insert("x0".into(), optv(&self.x0));
        m.insert("residual_source".into(), enum_name(&self.residual_source));
        m
    }
}
