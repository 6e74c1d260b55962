//! Flat `key=value` experiment configuration.
//!
//! A config file holds one `key = value` per line; `#` starts a comment. A file
//! whose first line is an echoed header (`# twinchi2 key=value ...`) is read
//! from that line alone, so any output CSV can be fed back as its own config.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use twinchi2_core::model::{Drive, SystemKind, SystemSpec};

use crate::CliError;

pub const HEADER_PREFIX: &str = "# twinchi2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Analytic,
    Sde,
    CavitySpectrum,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Analytic => "analytic",
            Route::Sde => "sde",
            Route::CavitySpectrum => "cavity-spectrum",
        }
    }
}

impl FromStr for Route {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "analytic" => Ok(Route::Analytic),
            "sde" => Ok(Route::Sde),
            "cavity-spectrum" => Ok(Route::CavitySpectrum),
            _ => Err(CliError::Config(format!("unknown route `{s}`"))),
        }
    }
}

/// Abscissa of the analytic route: plain `t`, or `Ωt` / `ζt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    Time,
    RateTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Vacuum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchChoice {
    Auto,
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticConfig {
    pub kind: SystemKind,
    pub coupling1: f64,
    pub coupling2: f64,
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub abscissa: Abscissa,
    pub se_columns: bool,
    pub intensities: bool,
}

/// Physical parameters shared by the stochastic and spectral routes.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub kind: SystemKind,
    pub chi1: f64,
    pub chi2: f64,
    /// `β1(0), β2(0)` or `ε1, ε2`.
    pub pumps: [f64; 2],
    pub loss_a: [f64; 3],
    pub loss_b: [f64; 2],
}

impl SystemParams {
    pub fn spec(&self) -> Result<SystemSpec, CliError> {
        let [p1, p2] = self.pumps.map(|p| Complex64::new(p, 0.0));
        let drive = if self.kind.is_cavity() {
            Drive::Cavity { eps1: p1, eps2: p2, loss_a: self.loss_a, loss_b: self.loss_b }
        } else {
            Drive::TravellingWave { pump1_init: p1, pump2_init: p2 }
        };
        Ok(SystemSpec::new(self.kind, self.chi1, self.chi2, drive)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdeConfig {
    pub system: SystemParams,
    pub initial: Start,
    pub end: f64,
    pub step: f64,
    pub samples: usize,
    pub traj: usize,
    pub seed: u64,
    pub max_divergent_fraction: f64,
    pub intensities: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityConfig {
    pub system: SystemParams,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub branch: BranchChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    Analytic(AnalyticConfig),
    Sde(SdeConfig),
    CavitySpectrum(CavityConfig),
}

/// Raw pairs in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairs(Vec<(String, String)>);

impl Pairs {
    /// Parses a config file or an echoed header.
    pub fn parse(text: &str) -> Result<Pairs, CliError> {
        let mut pairs = Pairs::default();
        if let Some(first) = text.lines().next() {
            if let Some(rest) = first.strip_prefix(HEADER_PREFIX) {
                for token in rest.split_whitespace() {
                    pairs.push_token(token)?;
                }
                return Ok(pairs);
            }
        }
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                pairs.push_token(line)?;
            }
        }
        Ok(pairs)
    }

    fn push_token(&mut self, token: &str) -> Result<(), CliError> {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{token}`")))?;
        self.set(k.trim(), v.trim())
    }

    /// Adds a pair; a key may appear once.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if self.0.iter().any(|(k, _)| k == key) {
            return Err(CliError::Config(format!("duplicate key `{key}`")));
        }
        self.0.push((key.to_string(), value.to_string()));
        Ok(())
    }

    /// Sets `key`, replacing any earlier value.
    pub fn overwrite(&mut self, key: &str, value: &str) {
        self.0.retain(|(k, _)| k != key);
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let i = self.0.iter().position(|(k, _)| k == key)?;
        Some(self.0.remove(i).1)
    }

    fn value<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::Config(format!("bad value `{v}` for `{key}`"))),
        }
    }

    fn finish(self, route: Route) -> Result<(), CliError> {
        match self.0.first() {
            None => Ok(()),
            Some((k, _)) => Err(CliError::Config(format!("unknown key `{k}` for route {}", route.name()))),
        }
    }
}

fn parse_kind(s: &str) -> Result<SystemKind, CliError> {
    SystemKind::ALL
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| CliError::Config(format!("unknown kind `{s}`")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::Config(format!("`{key}` takes true or false, got `{s}`"))),
    }
}

impl Pairs {
    fn flag(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        self.take(key).map_or(Ok(default), |v| parse_bool(key, &v))
    }

    fn kind(&mut self, default: SystemKind) -> Result<SystemKind, CliError> {
        self.take("kind").map_or(Ok(default), |v| parse_kind(&v))
    }

    fn system(&mut self, kind: SystemKind) -> Result<SystemParams, CliError> {
        let chi1 = self.value("chi1", 0.01)?;
        let chi2 = self.value("chi2", 0.01)?;
        let (pumps, loss_a, loss_b) = if kind.is_cavity() {
            let eps = [self.value("eps1", 45.0)?, self.value("eps2", 45.0)?];
            let a = [self.value("loss_a1", 1.0)?, self.value("loss_a2", 1.0)?, self.value("loss_a3", 1.0)?];
            let b = [self.value("loss_b1", 1.0)?, self.value("loss_b2", 1.0)?];
            (eps, a, b)
        } else {
            ([self.value("pump1", 1000.0)?, self.value("pump2", 1000.0)?], [0.0; 3], [0.0; 2])
        };
        Ok(SystemParams { kind, chi1, chi2, pumps, loss_a, loss_b })
    }
}

impl ExperimentConfig {
    /// Builds a validated config. A `route` key, if present, must agree with `route`.
    pub fn from_pairs(route: Route, mut pairs: Pairs) -> Result<Self, CliError> {
        if let Some(r) = pairs.take("route") {
            if r.parse::<Route>()? != route {
                return Err(CliError::Config(format!(
                    "config is for route {r}, but {} was requested",
                    route.name()
                )));
            }
        }
        let cfg = match route {
            Route::Analytic => {
                let kind = pairs.kind(SystemKind::ConcurrentTW)?;
                if kind.is_cavity() {
                    return Err(CliError::Config(format!("analytic route needs a travelling-wave kind, got {}", kind.name())));
                }
                let abscissa = match pairs.take("abscissa").as_deref() {
                    None | Some("t") => Abscissa::Time,
                    Some("rate_t") => Abscissa::RateTime,
                    Some(v) => return Err(CliError::Config(format!("`abscissa` takes t or rate_t, got `{v}`"))),
                };
                ExperimentConfig::Analytic(AnalyticConfig {
                    kind,
                    coupling1: pairs.value("coupling1", 1.0)?,
                    coupling2: pairs.value("coupling2", 1.0)?,
                    start: pairs.value("start", 0.0)?,
                    end: pairs.value("end", 2.0)?,
                    points: pairs.value("points", 101)?,
                    abscissa,
                    se_columns: pairs.flag("se_columns", true)?,
                    intensities: pairs.flag("intensities", false)?,
                })
            }
            Route::Sde => {
                let kind = pairs.kind(SystemKind::ConcurrentTW)?;
                let system = pairs.system(kind)?;
                let initial = match pairs.take("initial").as_deref() {
                    None | Some("vacuum") => Start::Vacuum,
                    Some("classical") => Start::Classical,
                    Some(v) => return Err(CliError::Config(format!("`initial` takes vacuum or classical, got `{v}`"))),
                };
                ExperimentConfig::Sde(SdeConfig {
                    system,
                    initial,
                    end: pairs.value("end", 0.4)?,
                    step: pairs.value("step", 1e-3)?,
                    samples: pairs.value("samples", 11)?,
                    traj: pairs.value("traj", 100_000)?,
                    seed: pairs.value("seed", 1)?,
                    max_divergent_fraction: pairs.value("max_divergent_fraction", 1e-3)?,
                    intensities: pairs.flag("intensities", false)?,
                })
            }
            Route::CavitySpectrum => {
                let kind = pairs.kind(SystemKind::ConcurrentCavity)?;
                if !kind.is_cavity() {
                    return Err(CliError::Config(format!("cavity-spectrum needs a cavity kind, got {}", kind.name())));
                }
                let system = pairs.system(kind)?;
                let branch = match pairs.take("branch").as_deref() {
                    None | Some("auto") => BranchChoice::Auto,
                    Some("below") => BranchChoice::Below,
                    Some("above") => BranchChoice::Above,
                    Some(v) => return Err(CliError::Config(format!("`branch` takes auto, below or above, got `{v}`"))),
                };
                ExperimentConfig::CavitySpectrum(CavityConfig {
                    system,
                    omega_min: pairs.value("omega_min", -10.0)?,
                    omega_max: pairs.value("omega_max", 10.0)?,
                    omega_points: pairs.value("omega_points", 401)?,
                    branch,
                })
            }
        };
        pairs.finish(route)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn route(&self) -> Route {
        match self {
            ExperimentConfig::Analytic(_) => Route::Analytic,
            ExperimentConfig::Sde(_) => Route::Sde,
            ExperimentConfig::CavitySpectrum(_) => Route::CavitySpectrum,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match self {
            ExperimentConfig::Analytic(c) => {
                if !(c.start.is_finite() && c.end.is_finite() && 0.0 <= c.start && c.start <= c.end) {
                    return bad(format!("need 0 <= start <= end, got {} and {}", c.start, c.end));
                }
                if c.points == 0 || (c.points == 1 && c.start != c.end) {
                    return bad("points must be at least 2 for a range".into());
                }
            }
            ExperimentConfig::Sde(c) => {
                c.system.spec()?;
                if c.system.kind == SystemKind::ConcurrentCavity {
                    return bad("ConcurrentCavity has no stochastic system; use cavity-spectrum".into());
                }
                if c.initial == Start::Classical && !c.system.kind.is_cavity() {
                    return bad("initial=classical applies to cavity kinds only".into());
                }
                if c.samples == 0 {
                    return bad("samples must be at least 1".into());
                }
            }
            ExperimentConfig::CavitySpectrum(c) => {
                c.system.spec()?;
                if !(c.omega_min.is_finite() && c.omega_max.is_finite() && c.omega_min <= c.omega_max) {
                    return bad(format!("need omega_min <= omega_max, got {} and {}", c.omega_min, c.omega_max));
                }
                if c.omega_points == 0 || (c.omega_points == 1 && c.omega_min != c.omega_max) {
                    return bad("omega_points must be at least 2 for a range".into());
                }
            }
        }
        Ok(())
    }

    /// The fully resolved configuration as a single header line.
    pub fn echo(&self) -> String {
        let mut s = format!("{HEADER_PREFIX} route={}", self.route().name());
        let mut put = |k: &str, v: &dyn fmt::Display| {
            let _ = write!(s, " {k}={v}");
        };
        match self {
            ExperimentConfig::Analytic(c) => {
                put("kind", &c.kind.name());
                put("coupling1", &c.coupling1);
                put("coupling2", &c.coupling2);
                put("start", &c.start);
                put("end", &c.end);
                put("points", &c.points);
                put("abscissa", &if c.abscissa == Abscissa::Time { "t" } else { "rate_t" });
                put("se_columns", &c.se_columns);
                put("intensities", &c.intensities);
            }
            ExperimentConfig::Sde(c) => {
                echo_system(&c.system, &mut put);
                put("initial", &if c.initial == Start::Vacuum { "vacuum" } else { "classical" });
                put("end", &c.end);
                put("step", &c.step);
                put("samples", &c.samples);
                put("traj", &c.traj);
                put("seed", &c.seed);
                put("max_divergent_fraction", &c.max_divergent_fraction);
                put("intensities", &c.intensities);
            }
            ExperimentConfig::CavitySpectrum(c) => {
                echo_system(&c.system, &mut put);
                put("omega_min", &c.omega_min);
                put("omega_max", &c.omega_max);
                put("omega_points", &c.omega_points);
                let b = match c.branch {
                    BranchChoice::Auto => "auto",
                    BranchChoice::Below => "below",
                    BranchChoice::Above => "above",
                };
                put("branch", &b);
            }
        }
        s
    }
}

fn echo_system(p: &SystemParams, put: &mut dyn FnMut(&str, &dyn fmt::Display)) {
    put("kind", &p.kind.name());
    put("chi1", &p.chi1);
    put("chi2", &p.chi2);
    if p.kind.is_cavity() {
        put("eps1", &p.pumps[0]);
        put("eps2", &p.pumps[1]);
        for (k, v) in ["loss_a1", "loss_a2", "loss_a3"].iter().zip(p.loss_a) {
            put(k, &v);
        }
        for (k, v) in ["loss_b1", "loss_b2"].iter().zip(p.loss_b) {
            put(k, &v);
        }
    } else {
        put("pump1", &p.pumps[0]);
        put("pump2", &p.pumps[1]);
    }
}
