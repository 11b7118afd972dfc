//! Run configuration: flat `key = value` lines with at most one dotted
//! section prefix. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::potential::PotentialProfile;
use crate::transport::SaddleModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key {0:?}")]
    MissingRequired(String),
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: a second sweep specification ({key:?}); exactly one sweep is allowed")]
    MultipleSweeps { line: usize, key: String },
    #[error("key {key:?}: {message}")]
    InvalidValue { key: String, message: String },
    #[error("key {key:?} does not apply to task {task}")]
    InapplicableKey { key: String, task: Task },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Scatter,
    Hierarchy,
    Clock,
    Absorb,
    Bardeen,
    Dephase,
    Emittance,
    Saddle,
    WignerSmith,
}

impl Task {
    const ALL: [(Task, &'static str); 9] = [
        (Task::Scatter, "scatter"),
        (Task::Hierarchy, "hierarchy"),
        (Task::Clock, "clock"),
        (Task::Absorb, "absorb"),
        (Task::Bardeen, "bardeen"),
        (Task::Dephase, "dephase"),
        (Task::Emittance, "emittance"),
        (Task::Saddle, "saddle"),
        (Task::WignerSmith, "wigner-smith"),
    ];

    pub fn name(self) -> &'static str {
        Task::ALL.iter().find(|(t, _)| *t == self).map(|(_, n)| *n).unwrap()
    }

    /// Section prefixes (besides the common ones) the task reads.
    fn sections(self) -> &'static [&'static str] {
        match self {
            Task::Scatter | Task::WignerSmith => &["profile", "energy"],
            Task::Hierarchy => &["profile", "energy", "window"],
            Task::Clock => &["profile", "energy", "window", "clock"],
            Task::Absorb | Task::Dephase => &["profile", "energy", "window", "absorb"],
            Task::Bardeen => &["profile", "energy", "tip"],
            Task::Emittance => &["profile", "energy", "emit"],
            Task::Saddle => &["saddle"],
        }
    }

    fn sweepable(self) -> &'static [SweepParam] {
        use SweepParam::*;
        match self {
            Task::Scatter | Task::WignerSmith | Task::Emittance => &[Energy, Height],
            Task::Hierarchy | Task::Clock => &[Energy, Height, Y],
            Task::Absorb | Task::Dephase => &[Energy, Height, Y, Gamma],
            Task::Bardeen => &[Energy, Height, Y, T2],
            Task::Saddle => &[U0, Energy],
        }
    }

    pub fn needs_profile(self) -> bool {
        self != Task::Saddle
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(t, _)| *t)
            .ok_or_else(|| format!("unknown task {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Energy,
    Height,
    Y,
    Gamma,
    T2,
    U0,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Energy => "energy",
            SweepParam::Height => "height",
            SweepParam::Y => "y",
            SweepParam::Gamma => "gamma",
            SweepParam::T2 => "t2",
            SweepParam::U0 => "u0",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepParam::Energy | SweepParam::Height | SweepParam::U0 => "energy",
            SweepParam::Y => "length",
            SweepParam::Gamma => "1/time",
            SweepParam::T2 => "energy^2",
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "energy" => SweepParam::Energy,
            "height" => SweepParam::Height,
            "y" => SweepParam::Y,
            "gamma" => SweepParam::Gamma,
            "t2" => SweepParam::T2,
            "u0" => SweepParam::U0,
            _ => return Err(format!("unknown sweep parameter {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let f = i as f64 / n;
                if self.log {
                    (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.stop - self.start)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub oracle: f64,
    pub unitarity: f64,
    pub first_order: f64,
    pub hermiticity: f64,
    pub zero_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle: 1e-4,
            unitarity: 1e-10,
            first_order: 0.05,
            hermiticity: 1e-6,
            zero_sum: 1e-10,
        }
    }
}

/// Window given either by its edges or by a centre and width; a missing
/// width is chosen per point as a hundredth of the shortest wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    Edges { lo: f64, hi: f64 },
    Centered { center: Option<f64>, width: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub profile: Option<PotentialProfile>,
    pub energy: Option<f64>,
    pub sweep: Sweep,
    pub window: WindowSpec,
    pub omegas: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub tip_x: Option<f64>,
    pub tip_t2: Option<f64>,
    pub tip_nu: f64,
    pub tip_width: Option<f64>,
    pub emit_range: Option<(f64, f64)>,
    pub emit_count: Option<usize>,
    pub saddle: SaddleModel,
    pub saddle_u0: Option<f64>,
    pub tol: Tolerances,
    pub output: Option<PathBuf>,
    /// Resolved settings, sorted, for the output header.
    pub echo: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "task",
    "energy",
    "output",
    "profile.file",
    "profile.inline",
    "profile.vleft",
    "profile.vright",
    "sweep.param",
    "sweep.start",
    "sweep.stop",
    "sweep.count",
    "sweep.scale",
    "window.lo",
    "window.hi",
    "window.center",
    "window.width",
    "clock.omega",
    "absorb.gamma",
    "tip.x",
    "tip.t2",
    "tip.nu_tip",
    "tip.width",
    "emit.lo",
    "emit.hi",
    "emit.count",
    "saddle.energy",
    "saddle.u0",
    "saddle.offsets",
    "saddle.smoothness",
    "saddle.region_energy",
    "saddle.dos_scale",
    "saddle.c_geom",
    "tol.oracle",
    "tol.unitarity",
    "tol.first_order",
    "tol.hermiticity",
    "tol.zero_sum",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
    echo: BTreeMap<String, String>,
}

impl Entries {
    fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.map.get(key).map(|(_, v)| v.clone());
        if let Some(v) = &v {
            self.echo.insert(key.to_string(), v.clone());
        }
        v
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| ConfigError::InvalidValue {
                key: key.to_string(),
                message: format!("{v:?}: {e}"),
            }),
        }
    }

    fn or_default<T: FromStr + fmt::Debug + Copy>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.parsed(key)? {
            Some(v) => Ok(v),
            None => {
                self.echo.insert(key.to_string(), format!("{default:?}"));
                Ok(default)
            }
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| ConfigError::InvalidValue {
                        key: key.to_string(),
                        message: format!("invalid number {:?}", t.trim()),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let column = content.len() - content.trim_start().len() + 1;
            return Err(ConfigError::ParseError {
                line,
                column,
                message: "expected `key = value`".into(),
            });
        };
        let key = content[..eq].trim();
        let value = content[eq + 1..].trim();
        let key_col = content.len() - content.trim_start().len() + 1;
        let valid_key = !key.is_empty()
            && key.matches('.').count() <= 1
            && !key.starts_with('.')
            && !key.ends_with('.')
            && key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.');
        if !valid_key {
            return Err(ConfigError::ParseError {
                line,
                column: key_col,
                message: format!("malformed key {key:?}"),
            });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if value.is_empty() && key != "profile.inline" {
            return Err(ConfigError::ParseError {
                line,
                column: eq + 2,
                message: format!("empty value for {key:?}"),
            });
        }
        if map.contains_key(key) {
            return Err(if key.starts_with("sweep.") {
                ConfigError::MultipleSweeps {
                    line,
                    key: key.to_string(),
                }
            } else {
                ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                }
            });
        }
        map.insert(key.to_string(), (line, value.to_string()));
    }
    Ok(map)
}

/// Parses a configuration; `base` resolves relative `profile.file` paths.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let map = tokenize(text)?;
    let mut en = Entries {
        map,
        echo: BTreeMap::new(),
    };

    let task: Task = en
        .parsed("task")?
        .ok_or_else(|| ConfigError::MissingRequired("task".into()))?;
    let keys: Vec<String> = en.map.keys().cloned().collect();
    for key in &keys {
        let section = key.split('.').next().unwrap();
        let common = matches!(section, "task" | "output" | "tol" | "sweep");
        if !common && !task.sections().contains(&section) {
            return Err(ConfigError::InapplicableKey {
                key: key.clone(),
                task,
            });
        }
    }

    let profile = if task.needs_profile() {
        Some(load_profile(&mut en, base)?)
    } else {
        None
    };

    let energy: Option<f64> = en.parsed("energy")?;
    let window = window_spec(&mut en)?;
    let omegas = en.list("clock.omega")?;
    if let Some(ws) = &omegas {
        if ws.len() < 3 || ws.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("clock.omega", "need at least three positive frequencies"));
        }
    }
    let gamma: Option<f64> = en.parsed("absorb.gamma")?;
    let tip_x: Option<f64> = en.parsed("tip.x")?;
    let tip_t2: Option<f64> = en.parsed("tip.t2")?;
    let tip_nu = if task == Task::Bardeen {
        en.or_default("tip.nu_tip", 1.0)?
    } else {
        1.0
    };
    let tip_width: Option<f64> = en.parsed("tip.width")?;
    let emit_lo: Option<f64> = en.parsed("emit.lo")?;
    let emit_hi: Option<f64> = en.parsed("emit.hi")?;
    let emit_range = match (emit_lo, emit_hi) {
        (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
        (None, None) => None,
        _ => return Err(invalid("emit.lo", "emit.lo and emit.hi must be given together, lo < hi")),
    };
    let emit_count: Option<usize> = en.parsed("emit.count")?;

    let mut saddle = SaddleModel::default();
    let mut saddle_u0 = None;
    if task == Task::Saddle {
        saddle.energy = en.or_default("saddle.energy", saddle.energy)?;
        saddle.smoothness = en.or_default("saddle.smoothness", saddle.smoothness)?;
        saddle.region_energy = en.or_default("saddle.region_energy", saddle.region_energy)?;
        saddle.dos_scale = en.or_default("saddle.dos_scale", saddle.dos_scale)?;
        saddle.c_geom = en.or_default("saddle.c_geom", saddle.c_geom)?;
        if let Some(offsets) = en.list("saddle.offsets")? {
            saddle.offsets = offsets;
        } else {
            let s: Vec<String> = saddle.offsets.iter().map(|o| o.to_string()).collect();
            en.echo.insert("saddle.offsets".into(), s.join(","));
        }
        saddle
            .validate()
            .map_err(|e| invalid("saddle", e.to_string()))?;
        saddle_u0 = en.parsed("saddle.u0")?;
    }

    let tol = Tolerances {
        oracle: en.or_default("tol.oracle", Tolerances::default().oracle)?,
        unitarity: en.or_default("tol.unitarity", Tolerances::default().unitarity)?,
        first_order: en.or_default("tol.first_order", Tolerances::default().first_order)?,
        hermiticity: en.or_default("tol.hermiticity", Tolerances::default().hermiticity)?,
        zero_sum: en.or_default("tol.zero_sum", Tolerances::default().zero_sum)?,
    };
    for (k, v) in [
        ("tol.oracle", tol.oracle),
        ("tol.unitarity", tol.unitarity),
        ("tol.first_order", tol.first_order),
        ("tol.hermiticity", tol.hermiticity),
        ("tol.zero_sum", tol.zero_sum),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(k, "tolerances must be positive"));
        }
    }

    let output = en.raw("output").map(PathBuf::from);

    let base = if task == Task::Saddle { saddle_u0 } else { energy };
    let sweep = resolve_sweep(&mut en, task, base)?;

    if sweep.param == SweepParam::Height {
        let p = profile.as_ref().unwrap();
        if p.max_real() == 0.0 {
            return Err(invalid("sweep.param", "height sweep needs a profile with a nonzero maximum"));
        }
    }
    if sweep.param == SweepParam::Y && matches!(window, WindowSpec::Edges { .. }) {
        return Err(invalid("sweep.param", "a y sweep positions the window; give window.width, not edges"));
    }
    if task != Task::Saddle && sweep.param != SweepParam::Energy && energy.is_none() {
        return Err(ConfigError::MissingRequired("energy".into()));
    }
    let needs_window = matches!(task, Task::Hierarchy | Task::Clock | Task::Absorb | Task::Dephase);
    if needs_window && sweep.param != SweepParam::Y {
        if let WindowSpec::Centered { center: None, .. } = window {
            return Err(ConfigError::MissingRequired("window.lo/window.hi or window.center".into()));
        }
    }
    if matches!(task, Task::Absorb | Task::Dephase) && sweep.param != SweepParam::Gamma && gamma.is_none() {
        return Err(ConfigError::MissingRequired("absorb.gamma".into()));
    }
    if task == Task::Bardeen {
        if sweep.param != SweepParam::Y && tip_x.is_none() {
            return Err(ConfigError::MissingRequired("tip.x".into()));
        }
        if sweep.param != SweepParam::T2 && tip_t2.is_none() {
            return Err(ConfigError::MissingRequired("tip.t2".into()));
        }
    }
    if task == Task::Saddle && sweep.param != SweepParam::U0 && saddle_u0.is_none() {
        return Err(ConfigError::MissingRequired("saddle.u0".into()));
    }
    if task == Task::Clock && omegas.is_none() {
        en.echo.insert("clock.omega".into(), "auto".into());
    }

    Ok(RunConfig {
        task,
        profile,
        energy,
        sweep,
        window,
        omegas,
        gamma,
        tip_x,
        tip_t2,
        tip_nu,
        tip_width,
        emit_range,
        emit_count,
        saddle,
        saddle_u0,
        tol,
        output,
        echo: en.echo,
    })
}

fn load_profile(en: &mut Entries, base: Option<&Path>) -> Result<PotentialProfile, ConfigError> {
    let file = en.raw("profile.file");
    let inline = en.raw("profile.inline");
    let mut text = match (file, inline) {
        (Some(_), Some(_)) => return Err(invalid("profile.file", "give profile.file or profile.inline, not both")),
        (None, None) => return Err(ConfigError::MissingRequired("profile.file or profile.inline".into())),
        (Some(f), None) => {
            let path = match base {
                Some(b) if Path::new(&f).is_relative() => b.join(&f),
                _ => PathBuf::from(&f),
            };
            std::fs::read_to_string(&path).map_err(|e| ConfigError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        }
        (None, Some(s)) => s.split(';').map(str::trim).collect::<Vec<_>>().join("\n"),
    };
    if let Some(v) = en.parsed::<f64>("profile.vleft")? {
        text.push_str(&format!("\n#vleft {v}"));
    }
    if let Some(v) = en.parsed::<f64>("profile.vright")? {
        text.push_str(&format!("\n#vright {v}"));
    }
    text.parse::<PotentialProfile>()
        .map_err(|e| invalid("profile", e.to_string()))
}

fn window_spec(en: &mut Entries) -> Result<WindowSpec, ConfigError> {
    let lo: Option<f64> = en.parsed("window.lo")?;
    let hi: Option<f64> = en.parsed("window.hi")?;
    let center: Option<f64> = en.parsed("window.center")?;
    let width: Option<f64> = en.parsed("window.width")?;
    if let Some(w) = width {
        if !(w > 0.0) {
            return Err(invalid("window.width", "must be positive"));
        }
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) => {
            if center.is_some() || width.is_some() {
                return Err(invalid("window.lo", "edges exclude window.center and window.width"));
            }
            if !(lo < hi) {
                return Err(invalid("window.lo", "window.lo must be below window.hi"));
            }
            Ok(WindowSpec::Edges { lo, hi })
        }
        (None, None) => Ok(WindowSpec::Centered { center, width }),
        _ => Err(invalid("window.lo", "window.lo and window.hi must be given together")),
    }
}

/// Without sweep keys the run is a single point at `base` (the energy, or
/// the saddle height for the saddle task).
fn resolve_sweep(en: &mut Entries, task: Task, base: Option<f64>) -> Result<Sweep, ConfigError> {
    let any_sweep = en.map.keys().any(|k| k.starts_with("sweep."));
    let default_param = if task == Task::Saddle {
        SweepParam::U0
    } else {
        SweepParam::Energy
    };
    if !any_sweep {
        let start = base.ok_or_else(|| {
            ConfigError::MissingRequired(if task == Task::Saddle { "saddle.u0" } else { "energy" }.into())
        })?;
        en.echo.insert("sweep.param".into(), default_param.name().into());
        en.echo.insert("sweep.count".into(), "1".into());
        return Ok(Sweep {
            param: default_param,
            start,
            stop: start,
            count: 1,
            log: false,
        });
    }
    let param: SweepParam = en
        .parsed("sweep.param")?
        .ok_or_else(|| ConfigError::MissingRequired("sweep.param".into()))?;
    if !task.sweepable().contains(&param) {
        return Err(invalid("sweep.param", format!("{} cannot be swept in task {task}", param.name())));
    }
    let start: f64 = en
        .parsed("sweep.start")?
        .ok_or_else(|| ConfigError::MissingRequired("sweep.start".into()))?;
    let count: usize = en.or_default("sweep.count", 1usize)?;
    if count == 0 {
        return Err(invalid("sweep.count", "must be at least 1"));
    }
    let stop: f64 = match en.parsed("sweep.stop")? {
        Some(s) => s,
        None if count == 1 => start,
        None => return Err(ConfigError::MissingRequired("sweep.stop".into())),
    };
    let scale = en.raw("sweep.scale").unwrap_or_else(|| {
        en.echo.insert("sweep.scale".into(), "linear".into());
        "linear".into()
    });
    let log = match scale.as_str() {
        "linear" => false,
        "log" => true,
        other => return Err(invalid("sweep.scale", format!("{other:?} is neither linear nor log"))),
    };
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(invalid("sweep.scale", "a log sweep needs positive start and stop"));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(invalid("sweep.start", "must be finite"));
    }
    Ok(Sweep {
        param,
        start,
        stop,
        count,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "task = scatter\nprofile.inline = 0 2 1 0\nenergy = 0.5\n";

    #[test]
    fn minimal_scatter() {
        let c = parse_config(MINIMAL, None).unwrap();
        assert_eq!(c.task, Task::Scatter);
        assert_eq!(c.sweep.count, 1);
        assert_eq!(c.sweep.values(), vec![0.5]);
        assert_eq!(c.echo.get("sweep.param").unwrap(), "energy");
    }

    #[test]
    fn two_sweeps_rejected() {
        let text = format!("{MINIMAL}sweep.param = energy\nsweep.start = 0.1\nsweep.param = height\n");
        assert!(matches!(parse_config(&text, None), Err(ConfigError::MultipleSweeps { line: 6, .. })));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(
            parse_config("task = scatter\n  nonsense\n", None),
            Err(ConfigError::ParseError { line: 2, column: 3, .. })
        ));
        assert!(matches!(
            parse_config("task = scatter\nprofile.color = red\n", None),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("task = scatter\nenergy = 1\n", None),
            Err(ConfigError::MissingRequired(_))
        ));
        assert!(matches!(
            parse_config(&format!("{MINIMAL}tip.x = 1\n"), None),
            Err(ConfigError::InapplicableKey { .. })
        ));
        assert!(matches!(
            parse_config("task = scatter\na.b.c = 1\n", None),
            Err(ConfigError::ParseError { line: 2, .. })
        ));
    }

    #[test]
    fn fig3_style_saddle_scan() {
        let text = "task = saddle\nsaddle.offsets = 0, 1, 2\nsweep.param = u0\n\
                    sweep.start = 1\nsweep.stop = -3\nsweep.count = 400\n";
        let c = parse_config(text, None).unwrap();
        assert_eq!(c.saddle.offsets, vec![0.0, 1.0, 2.0]);
        let v = c.sweep.values();
        assert_eq!(v.len(), 400);
        assert_eq!((v[0], v[399]), (1.0, -3.0));
    }

    #[test]
    fn log_sweep() {
        let text = "task = absorb\nprofile.inline = 0 2 1 0\nenergy = 0.5\nwindow.lo = 0.5\n\
                    window.hi = 1\nsweep.param = gamma\nsweep.start = 1e-4\nsweep.stop = 1e-2\n\
                    sweep.count = 3\nsweep.scale = log\n";
        let v = parse_config(text, None).unwrap().sweep.values();
        assert!((v[1] - 1e-3).abs() < 1e-15);
    }
}
