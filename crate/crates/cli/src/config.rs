//! Experiment configuration: a TOML document validated into plain settings.
//!
//! Every scalar that can be rejected is read as a [`Spanned`] value, so a
//! validation error can point at the line it came from. The schema is
//! documented in `docs/config.md`.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use nlsgraph::graph::{MetricGraph, PotentialSpec};

/// Snapshot times used when a 300-unit run does not list its own.
pub const DEFAULT_SNAPSHOT_TIMES: [f64; 6] = [0.0, 100.0, 144.0, 175.0, 225.0, 300.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Maps byte spans of the source text to 1-based line numbers.
struct Source<'a>(&'a str);

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.0.len());
        1 + self.0.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count()
    }

    fn at<T>(&self, value: &Spanned<T>, message: impl Into<String>) -> ConfigError {
        ConfigError { line: Some(self.line(value.span())), message: message.into() }
    }
}

fn missing(key: &str) -> ConfigError {
    ConfigError { line: None, message: format!("missing required key `{key}`") }
}

// Raw document, exactly as deserialized.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p: Option<Spanned<f64>>,
    graph: Spanned<RawGraph>,
    grid: Option<RawGrid>,
    datum: Option<Spanned<RawDatum>>,
    integrator: Option<RawIntegrator>,
    run: Option<RawRun>,
    groundstate: Option<Spanned<RawGroundState>>,
    scan: Option<RawScan>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    kind: Spanned<String>,
    halflines: Option<Spanned<usize>>,
    truncation: Option<Spanned<f64>>,
    perimeters: Option<Spanned<Vec<f64>>>,
    pendant: Option<Spanned<f64>>,
    delta: Option<Spanned<f64>>,
    path: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    h: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatum {
    kind: Spanned<String>,
    launch: Option<Spanned<usize>>,
    x0: Option<Spanned<f64>>,
    v0: Option<Spanned<f64>>,
    v: Option<Spanned<f64>>,
    omega: Option<Spanned<f64>>,
    mu: Option<Spanned<f64>>,
    theta: Option<Spanned<f64>>,
    renormalize: Option<bool>,
    path: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    dt: Option<Spanned<f64>>,
    tolerance: Option<Spanned<f64>>,
    max_iterations: Option<Spanned<usize>>,
    nonlinear: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    t_end: Option<Spanned<f64>>,
    record_every: Option<Spanned<usize>>,
    snapshot_times: Option<Spanned<Vec<f64>>>,
    mass_guard: Option<Spanned<f64>>,
    observables: Option<Spanned<Vec<String>>>,
    orbital_exclusion: Option<Spanned<f64>>,
    reflected_fraction: Option<Spanned<f64>>,
    static_threshold: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroundState {
    mu: Option<Spanned<f64>>,
    omega: Option<Spanned<f64>>,
    guess: Option<Spanned<String>>,
    width: Option<Spanned<f64>>,
    jitter: Option<Spanned<f64>>,
    tau: Option<Spanned<f64>>,
    tau_growth: Option<Spanned<f64>>,
    tau_max: Option<Spanned<f64>>,
    tolerance: Option<Spanned<f64>>,
    max_iterations: Option<Spanned<usize>>,
    critical: Option<RawCritical>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCritical {
    bracket: Spanned<Vec<f64>>,
    mu_tolerance: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    velocities: Option<Spanned<Vec<f64>>>,
    positions: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

// Validated settings.

#[derive(Debug, Clone, PartialEq)]
pub enum GraphChoice {
    Star { halflines: usize, truncation: f64 },
    Line { truncation: f64, delta: Option<f64> },
    BubbleTower { perimeters: Vec<f64>, truncation: f64 },
    PendantStar { halflines: usize, pendant: f64, truncation: f64 },
    File(PathBuf),
}

/// Soliton size, either by frequency or by mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolitonSize {
    Omega(f64),
    Mass(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatumChoice {
    /// Line soliton laid across the vertex, phase convention `e^{i v0 x}` on
    /// the launch edge (negative `v0` is incoming).
    LineSoliton { launch: usize, x0: f64, v0: f64, size: SolitonSize },
    /// Cut-off soliton on the launch edge alone (positive `v` is incoming).
    SlowSoliton { launch: usize, x0: f64, v: f64, mu: f64, theta: f64, renormalize: bool },
    /// Folded ground state of a bubble tower.
    Folded { size: SolitonSize },
    /// Last snapshot stored in a file, on the same graph and spacing.
    File(PathBuf),
}

impl DatumChoice {
    pub fn launch(&self) -> usize {
        match *self {
            DatumChoice::LineSoliton { launch, .. } | DatumChoice::SlowSoliton { launch, .. } => launch,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub nonlinear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    F,
    Orbital,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub t_end: f64,
    pub record_every: usize,
    pub snapshot_times: Vec<f64>,
    pub mass_guard: f64,
    pub observables: Vec<Observable>,
    pub orbital_exclusion: f64,
    pub reflected_fraction: f64,
    pub static_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuessChoice {
    Gaussian { width: f64, jitter: f64 },
    Folded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateSettings {
    pub size: SolitonSize,
    pub guess: GuessChoice,
    pub tau: f64,
    pub tau_growth: f64,
    pub tau_max: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub critical: Option<CriticalSettings>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSettings {
    pub bracket: (f64, f64),
    pub mu_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: f64,
    pub graph: GraphChoice,
    pub h: f64,
    pub datum: Option<DatumChoice>,
    pub integrator: IntegratorSettings,
    pub run: Option<RunSettings>,
    pub groundstate: Option<GroundStateSettings>,
    pub velocities: Option<Vec<f64>>,
    pub positions: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads and validates a config file. Relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| Source(text).line(s)),
            message: e.message().trim().to_string(),
        })?;
        Validator { src: Source(text), base }.config(raw)
    }

    pub fn build_graph(&self) -> Result<MetricGraph, ConfigError> {
        let graph = match &self.graph {
            GraphChoice::Star { halflines, truncation } => MetricGraph::star(*halflines, *truncation),
            GraphChoice::Line { truncation, delta: None } => MetricGraph::line(*truncation),
            GraphChoice::Line { truncation, delta: Some(g) } => {
                MetricGraph::line_with_potential(PotentialSpec::Delta { strength: *g }, *truncation)
            }
            GraphChoice::BubbleTower { perimeters, truncation } => MetricGraph::bubble_tower(perimeters, *truncation),
            GraphChoice::PendantStar { halflines, pendant, truncation } => {
                MetricGraph::pendant_star(*halflines, *pendant, *truncation)
            }
            GraphChoice::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                    line: None,
                    message: format!("cannot read graph file {}: {e}", path.display()),
                })?;
                MetricGraph::from_json(&text)
            }
        };
        graph.map_err(|e| ConfigError { line: None, message: format!("graph: {e}") })
    }
}

struct Validator<'a> {
    src: Source<'a>,
    base: &'a Path,
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl Validator<'_> {
    fn positive(&self, value: &Spanned<f64>, key: &str) -> Result<f64, ConfigError> {
        let v = *value.get_ref();
        if positive(v) {
            Ok(v)
        } else {
            Err(self.src.at(value, format!("`{key}` must be positive and finite, got {v}")))
        }
    }

    fn positive_or(&self, value: &Option<Spanned<f64>>, key: &str, default: f64) -> Result<f64, ConfigError> {
        value.as_ref().map_or(Ok(default), |v| self.positive(v, key))
    }

    fn finite(&self, value: &Spanned<f64>, key: &str) -> Result<f64, ConfigError> {
        let v = *value.get_ref();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.src.at(value, format!("`{key}` must be finite")))
        }
    }

    fn fraction(&self, value: &Option<Spanned<f64>>, key: &str, default: f64) -> Result<f64, ConfigError> {
        match value {
            None => Ok(default),
            Some(v) if (0.0..=1.0).contains(v.get_ref()) => Ok(*v.get_ref()),
            Some(v) => Err(self.src.at(v, format!("`{key}` must lie in [0, 1], got {}", v.get_ref()))),
        }
    }

    fn path(&self, value: &Spanned<String>) -> PathBuf {
        self.base.join(value.get_ref())
    }

    /// Rejects keys that the selected `kind` does not read.
    fn unused<T>(&self, value: &Option<Spanned<T>>, key: &str, kind: &Spanned<String>) -> Result<(), ConfigError> {
        match value {
            Some(v) => Err(self.src.at(v, format!("`{key}` is not used by kind = \"{}\"", kind.get_ref()))),
            None => Ok(()),
        }
    }

    fn config(&self, raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
        let p = match &raw.p {
            None => 5.0,
            Some(v) if *v.get_ref() > 2.0 && *v.get_ref() < 6.0 => *v.get_ref(),
            Some(v) => return Err(self.src.at(v, format!("`p` must lie in (2, 6), got {}", v.get_ref()))),
        };
        let graph = self.graph(&raw.graph)?;
        let h = match raw.grid.as_ref().and_then(|g| g.h.as_ref()) {
            None => 0.05,
            Some(v) => self.positive(v, "grid.h")?,
        };
        let datum = raw.datum.as_ref().map(|d| self.datum(d)).transpose()?;
        let integrator = self.integrator(raw.integrator.as_ref())?;
        let run = raw.run.as_ref().map(|r| self.run(r, integrator.dt)).transpose()?;
        let groundstate = raw.groundstate.as_ref().map(|g| self.groundstate(g)).transpose()?;
        let list = |value: &Option<Spanned<Vec<f64>>>, key: &str, nonneg: bool| -> Result<Option<Vec<f64>>, ConfigError> {
            let Some(v) = value else { return Ok(None) };
            if v.get_ref().is_empty() {
                return Err(self.src.at(v, format!("`{key}` must not be empty")));
            }
            if v.get_ref().iter().any(|x| !x.is_finite() || (nonneg && *x < 0.0)) {
                let need = if nonneg { "finite and non-negative" } else { "finite" };
                return Err(self.src.at(v, format!("every entry of `{key}` must be {need}")));
            }
            Ok(Some(v.get_ref().clone()))
        };
        let (velocities, positions) = match &raw.scan {
            Some(scan) => (list(&scan.velocities, "scan.velocities", false)?, list(&scan.positions, "scan.positions", true)?),
            None => (None, None),
        };
        let output_dir = raw.output.and_then(|o| o.dir).map(|d| self.base.join(d));
        Ok(ExperimentConfig { p, graph, h, datum, integrator, run, groundstate, velocities, positions, output_dir })
    }

    fn graph(&self, spanned: &Spanned<RawGraph>) -> Result<GraphChoice, ConfigError> {
        let g = spanned.get_ref();
        let kind = &g.kind;
        let truncation = || match &g.truncation {
            Some(t) => self.positive(t, "graph.truncation"),
            None => Err(self.src.at(kind, "`graph.truncation` is required for this kind")),
        };
        let halflines = |min: usize| match &g.halflines {
            Some(n) if *n.get_ref() >= min => Ok(*n.get_ref()),
            Some(n) => Err(self.src.at(n, format!("`graph.halflines` must be at least {min}"))),
            None => Err(self.src.at(kind, "`graph.halflines` is required for this kind")),
        };
        let choice = match kind.get_ref().as_str() {
            "star" => {
                self.unused(&g.perimeters, "perimeters", kind)?;
                self.unused(&g.pendant, "pendant", kind)?;
                self.unused(&g.delta, "delta", kind)?;
                self.unused(&g.path, "path", kind)?;
                GraphChoice::Star { halflines: halflines(2)?, truncation: truncation()? }
            }
            "line" => {
                self.unused(&g.halflines, "halflines", kind)?;
                self.unused(&g.perimeters, "perimeters", kind)?;
                self.unused(&g.pendant, "pendant", kind)?;
                self.unused(&g.path, "path", kind)?;
                let delta = g.delta.as_ref().map(|d| self.finite(d, "graph.delta")).transpose()?;
                GraphChoice::Line { truncation: truncation()?, delta }
            }
            "bubble_tower" => {
                self.unused(&g.halflines, "halflines", kind)?;
                self.unused(&g.pendant, "pendant", kind)?;
                self.unused(&g.delta, "delta", kind)?;
                self.unused(&g.path, "path", kind)?;
                let perimeters = g.perimeters.as_ref().ok_or_else(|| self.src.at(kind, "`graph.perimeters` is required"))?;
                let list = perimeters.get_ref();
                if list.is_empty() || list.iter().any(|&l| !positive(l)) {
                    return Err(self.src.at(perimeters, "`graph.perimeters` must be a non-empty list of positive lengths"));
                }
                GraphChoice::BubbleTower { perimeters: list.clone(), truncation: truncation()? }
            }
            "pendant_star" => {
                self.unused(&g.perimeters, "perimeters", kind)?;
                self.unused(&g.delta, "delta", kind)?;
                self.unused(&g.path, "path", kind)?;
                let pendant = g.pendant.as_ref().ok_or_else(|| self.src.at(kind, "`graph.pendant` is required"))?;
                GraphChoice::PendantStar {
                    halflines: halflines(3)?,
                    pendant: self.positive(pendant, "graph.pendant")?,
                    truncation: truncation()?,
                }
            }
            "file" => {
                self.unused(&g.halflines, "halflines", kind)?;
                self.unused(&g.truncation, "truncation", kind)?;
                self.unused(&g.perimeters, "perimeters", kind)?;
                self.unused(&g.pendant, "pendant", kind)?;
                self.unused(&g.delta, "delta", kind)?;
                let path = g.path.as_ref().ok_or_else(|| self.src.at(kind, "`graph.path` is required"))?;
                GraphChoice::File(self.path(path))
            }
            other => {
                return Err(self.src.at(
                    kind,
                    format!("unknown graph kind \"{other}\" (expected star, line, bubble_tower, pendant_star or file)"),
                ))
            }
        };
        Ok(choice)
    }

    fn size(&self, omega: &Option<Spanned<f64>>, mu: &Option<Spanned<f64>>, table: &str) -> Result<SolitonSize, ConfigError> {
        match (omega, mu) {
            (Some(o), None) => Ok(SolitonSize::Omega(self.positive(o, &format!("{table}.omega"))?)),
            (None, Some(m)) => Ok(SolitonSize::Mass(self.positive(m, &format!("{table}.mu"))?)),
            (None, None) => Ok(SolitonSize::Omega(1.0)),
            (Some(_), Some(m)) => Err(self.src.at(m, format!("give either `{table}.omega` or `{table}.mu`, not both"))),
        }
    }

    fn datum(&self, spanned: &Spanned<RawDatum>) -> Result<DatumChoice, ConfigError> {
        let d = spanned.get_ref();
        let kind = &d.kind;
        let launch = d.launch.as_ref().map_or(0, |l| *l.get_ref());
        let x0 = || match &d.x0 {
            Some(x) if *x.get_ref() >= 0.0 && x.get_ref().is_finite() => Ok(*x.get_ref()),
            Some(x) => Err(self.src.at(x, "`datum.x0` must be finite and non-negative")),
            None => Err(self.src.at(kind, "`datum.x0` is required for this kind")),
        };
        let choice = match kind.get_ref().as_str() {
            "line_soliton" => {
                self.unused(&d.v, "v", kind)?;
                self.unused(&d.theta, "theta", kind)?;
                self.unused(&d.path, "path", kind)?;
                let v0 = d.v0.as_ref().map(|v| self.finite(v, "datum.v0")).transpose()?.unwrap_or(0.0);
                DatumChoice::LineSoliton { launch, x0: x0()?, v0, size: self.size(&d.omega, &d.mu, "datum")? }
            }
            "slow_soliton" => {
                self.unused(&d.v0, "v0", kind)?;
                self.unused(&d.omega, "omega", kind)?;
                self.unused(&d.path, "path", kind)?;
                let mu = d.mu.as_ref().ok_or_else(|| self.src.at(kind, "`datum.mu` is required for a slow soliton"))?;
                DatumChoice::SlowSoliton {
                    launch,
                    x0: x0()?,
                    v: d.v.as_ref().map(|v| self.finite(v, "datum.v")).transpose()?.unwrap_or(0.0),
                    mu: self.positive(mu, "datum.mu")?,
                    theta: d.theta.as_ref().map(|t| self.finite(t, "datum.theta")).transpose()?.unwrap_or(0.0),
                    renormalize: d.renormalize.unwrap_or(false),
                }
            }
            "folded" => {
                for (value, key) in [(&d.x0, "x0"), (&d.v0, "v0"), (&d.v, "v"), (&d.theta, "theta")] {
                    self.unused(value, key, kind)?;
                }
                self.unused(&d.launch, "launch", kind)?;
                self.unused(&d.path, "path", kind)?;
                DatumChoice::Folded { size: self.size(&d.omega, &d.mu, "datum")? }
            }
            "file" => {
                let path = d.path.as_ref().ok_or_else(|| self.src.at(kind, "`datum.path` is required"))?;
                DatumChoice::File(self.path(path))
            }
            other => {
                return Err(self.src.at(
                    kind,
                    format!("unknown datum kind \"{other}\" (expected line_soliton, slow_soliton, folded or file)"),
                ))
            }
        };
        Ok(choice)
    }

    fn integrator(&self, raw: Option<&RawIntegrator>) -> Result<IntegratorSettings, ConfigError> {
        let mut settings = IntegratorSettings { dt: 0.01, tolerance: 1e-10, max_iterations: 50, nonlinear: true };
        if let Some(r) = raw {
            settings.dt = self.positive_or(&r.dt, "integrator.dt", settings.dt)?;
            settings.tolerance = self.positive_or(&r.tolerance, "integrator.tolerance", settings.tolerance)?;
            if let Some(m) = &r.max_iterations {
                if *m.get_ref() == 0 {
                    return Err(self.src.at(m, "`integrator.max_iterations` must be at least 1"));
                }
                settings.max_iterations = *m.get_ref();
            }
            settings.nonlinear = r.nonlinear.unwrap_or(true);
        }
        Ok(settings)
    }

    fn run(&self, r: &RawRun, dt: f64) -> Result<RunSettings, ConfigError> {
        let t_end_value = r.t_end.as_ref().ok_or_else(|| missing("run.t_end"))?;
        let t_end = self.positive(t_end_value, "run.t_end")?;
        let steps = t_end / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(self.src.at(t_end_value, format!("`run.t_end` = {t_end} is not a whole number of steps dt = {dt}")));
        }
        let record_every = match &r.record_every {
            Some(n) if *n.get_ref() == 0 => return Err(self.src.at(n, "`run.record_every` must be at least 1")),
            Some(n) => *n.get_ref(),
            None => ((1.0 / dt).round() as usize).max(1),
        };
        let snapshot_times = match &r.snapshot_times {
            Some(times) => {
                if times.get_ref().iter().any(|&t| !(0.0..=t_end).contains(&t)) {
                    return Err(self.src.at(times, format!("snapshot times must lie in [0, {t_end}]")));
                }
                times.get_ref().clone()
            }
            None if t_end == 300.0 => DEFAULT_SNAPSHOT_TIMES.to_vec(),
            None => vec![0.0, t_end],
        };
        let observables = match &r.observables {
            None => Vec::new(),
            Some(list) => list
                .get_ref()
                .iter()
                .map(|name| match name.as_str() {
                    "f" => Ok(Observable::F),
                    "orbital" => Ok(Observable::Orbital),
                    other => Err(self.src.at(list, format!("unknown observable \"{other}\" (expected f or orbital)"))),
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(RunSettings {
            t_end,
            record_every,
            snapshot_times,
            mass_guard: self.positive_or(&r.mass_guard, "run.mass_guard", 1e-2)?,
            observables,
            orbital_exclusion: self.positive_or(&r.orbital_exclusion, "run.orbital_exclusion", 5.0)?,
            reflected_fraction: self.fraction(&r.reflected_fraction, "run.reflected_fraction", 0.9)?,
            static_threshold: self.positive_or(&r.static_threshold, "run.static_threshold", 0.1)?,
        })
    }

    fn groundstate(&self, spanned: &Spanned<RawGroundState>) -> Result<GroundStateSettings, ConfigError> {
        let g = spanned.get_ref();
        let guess = match g.guess.as_ref().map(|s| s.get_ref().as_str()) {
            None | Some("gaussian") => GuessChoice::Gaussian {
                width: self.positive_or(&g.width, "groundstate.width", 1.0)?,
                jitter: match &g.jitter {
                    None => 0.2,
                    Some(j) if (0.0..1.0).contains(j.get_ref()) => *j.get_ref(),
                    Some(j) => return Err(self.src.at(j, "`groundstate.jitter` must lie in [0, 1)")),
                },
            },
            Some("folded") => GuessChoice::Folded,
            Some(other) => {
                let at = g.guess.as_ref().expect("matched Some");
                return Err(self.src.at(at, format!("unknown guess \"{other}\" (expected gaussian or folded)")));
            }
        };
        let tau = self.positive_or(&g.tau, "groundstate.tau", 0.05)?;
        let tau_growth = match &g.tau_growth {
            None => 1.001,
            Some(v) if *v.get_ref() >= 1.0 && v.get_ref().is_finite() => *v.get_ref(),
            Some(v) => return Err(self.src.at(v, "`groundstate.tau_growth` must be at least 1")),
        };
        let tau_max = self.positive_or(&g.tau_max, "groundstate.tau_max", tau.max(1.0))?;
        if tau_max < tau {
            let at = g.tau_max.as_ref().expect("explicit tau_max below the default tau");
            return Err(self.src.at(at, "`groundstate.tau_max` must not be below `groundstate.tau`"));
        }
        let tolerance = match &g.tolerance {
            None => 1e-12,
            Some(v) if positive(*v.get_ref()) && *v.get_ref() < 1.0 => *v.get_ref(),
            Some(v) => return Err(self.src.at(v, "`groundstate.tolerance` must lie in (0, 1)")),
        };
        let max_iterations = match &g.max_iterations {
            Some(m) if *m.get_ref() == 0 => return Err(self.src.at(m, "`groundstate.max_iterations` must be at least 1")),
            Some(m) => *m.get_ref(),
            None => 100_000,
        };
        let critical = g
            .critical
            .as_ref()
            .map(|c| {
                let b = c.bracket.get_ref();
                if b.len() != 2 || !(b[0] > 0.0 && b[0] < b[1] && b[1].is_finite()) {
                    return Err(self.src.at(&c.bracket, "`groundstate.critical.bracket` must be [mu_lo, mu_hi] with 0 < mu_lo < mu_hi"));
                }
                Ok(CriticalSettings {
                    bracket: (b[0], b[1]),
                    mu_tolerance: self.positive_or(&c.mu_tolerance, "groundstate.critical.mu_tolerance", 0.01)?,
                })
            })
            .transpose()?;
        Ok(GroundStateSettings {
            size: self.size(&g.omega, &g.mu, "groundstate")?,
            guess,
            tau,
            tau_growth,
            tau_max,
            tolerance,
            max_iterations,
            critical,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, Path::new("/cfg"))
    }

    const REFLECTION: &str = r#"
p = 5.0

[graph]
kind = "star"
halflines = 3
truncation = 50.0

[datum]
kind = "line_soliton"
x0 = 25.0
v0 = -0.08

[integrator]
dt = 0.01

[run]
t_end = 300.0
"#;

    #[test]
    fn reflection_config_gets_the_documented_defaults() {
        let c = parse(REFLECTION).unwrap();
        assert_eq!(c.graph, GraphChoice::Star { halflines: 3, truncation: 50.0 });
        assert_eq!(c.h, 0.05);
        assert_eq!(
            c.datum,
            Some(DatumChoice::LineSoliton { launch: 0, x0: 25.0, v0: -0.08, size: SolitonSize::Omega(1.0) })
        );
        let run = c.run.unwrap();
        assert_eq!(run.snapshot_times, DEFAULT_SNAPSHOT_TIMES.to_vec());
        assert_eq!(run.record_every, 100);
        assert_eq!(run.reflected_fraction, 0.9);
    }

    #[test]
    fn negative_dt_is_reported_on_its_line() {
        let text = REFLECTION.replace("dt = 0.01", "dt = -0.01");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.line, Some(15));
        assert!(err.message.contains("integrator.dt"), "{err}");
    }

    #[test]
    fn syntax_and_schema_errors_carry_lines() {
        let err = parse("p = 5.0\n[graph]\nkind = \"star\"\nhalflines = 3\ntruncation = 10.0\nbogus = 1\n").unwrap_err();
        assert_eq!(err.line, Some(6), "{err}");
        let err = parse("p = 5.0\n[graph\n").unwrap_err();
        assert_eq!(err.line, Some(2), "{err}");
        let err = parse("p = 7.0\n[graph]\nkind = \"line\"\ntruncation = 10.0\n").unwrap_err();
        assert_eq!(err.line, Some(1), "{err}");
    }

    #[test]
    fn kind_specific_keys_are_checked() {
        let err = parse("[graph]\nkind = \"star\"\nhalflines = 3\ntruncation = 10.0\nperimeters = [1.0]\n").unwrap_err();
        assert_eq!(err.line, Some(5));
        let err = parse("[graph]\nkind = \"tree\"\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = parse("[graph]\nkind = \"bubble_tower\"\ntruncation = 10.0\n").unwrap_err();
        assert!(err.message.contains("perimeters"));
    }

    #[test]
    fn duration_must_be_a_whole_number_of_steps() {
        let text = REFLECTION.replace("t_end = 300.0", "t_end = 300.005");
        assert_eq!(parse(&text).unwrap_err().line, Some(18));
    }

    #[test]
    fn relative_paths_resolve_against_the_config_directory() {
        let c = parse("[graph]\nkind = \"file\"\npath = \"g.json\"\n[output]\ndir = \"out\"\n").unwrap();
        assert_eq!(c.graph, GraphChoice::File(PathBuf::from("/cfg/g.json")));
        assert_eq!(c.output_dir, Some(PathBuf::from("/cfg/out")));
    }

    #[test]
    fn scan_lists_must_not_be_empty() {
        let text = format!("{REFLECTION}\n[scan]\nvelocities = []\n");
        assert!(parse(&text).unwrap_err().message.contains("must not be empty"));
    }
}
