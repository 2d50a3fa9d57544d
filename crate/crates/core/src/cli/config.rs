//! INI-style simulation config.
//!
//! ```text
//! [model]
//! name = dg          # or custom, with `potential = "<DSL>"`
//! D = 0.05           # any other key is a model parameter
//! [grid]
//! L = 40
//! N = 512
//! [time]
//! dt = 1e-4
//! T = 1
//! snapshot_every = 100
//! [initial]
//! kind = gaussian_on_background
//! [output]
//! dir = out
//! equation = both
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{InitialData, MIN_POINTS};
use crate::expr::{parse_potential, Params, RHO_FLOOR};
use crate::models::{ModelKind, PotentialModel};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// `section.key`, or `line N` for syntax errors.
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationChoice {
    Psi,
    Phi,
    Both,
}

impl EquationChoice {
    pub fn runs_psi(self) -> bool {
        matches!(self, EquationChoice::Psi | EquationChoice::Both)
    }

    pub fn runs_phi(self) -> bool {
        matches!(self, EquationChoice::Phi | EquationChoice::Both)
    }
}

impl FromStr for EquationChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psi" => Ok(EquationChoice::Psi),
            "phi" => Ok(EquationChoice::Phi),
            "both" => Ok(EquationChoice::Both),
            other => Err(format!("expected psi, phi or both, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSection {
    pub name: String,
    pub potential: Option<String>,
    pub hbar: f64,
    pub m: f64,
    pub params: BTreeMap<String, f64>,
    pub rho_floor: f64,
    pub regularize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSection {
    pub kind: String,
    pub background: f64,
    pub amplitude: f64,
    pub width: f64,
    pub momentum: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSection {
    pub dir: String,
    pub equation: EquationChoice,
    pub norm_tolerance: f64,
    pub gauge_density_tolerance: f64,
}

/// The full effective configuration, defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    pub output: OutputSection,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: ModelSection {
                name: "free".into(),
                potential: None,
                hbar: 1.0,
                m: 1.0,
                params: BTreeMap::new(),
                rho_floor: RHO_FLOOR,
                regularize: false,
            },
            grid: GridSection { length: 40.0, points: 512 },
            time: TimeSection { dt: 1e-4, t_final: 1.0, snapshot_every: 100 },
            initial: InitialSection {
                kind: "gaussian_on_background".into(),
                background: 0.5,
                amplitude: 0.3,
                width: 1.0,
                momentum: 1.0,
                center: f64::NAN,
            },
            output: OutputSection {
                dir: "out".into(),
                equation: EquationChoice::Psi,
                norm_tolerance: 1e-10,
                gauge_density_tolerance: 1e-6,
            },
        }
    }
}

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && ((v.starts_with('"') && v.ends_with('"')) || (v.starts_with('\'') && v.ends_with('\''))) {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

const SECTIONS: [&str; 5] = ["model", "grid", "time", "initial", "output"];

fn tokenize(text: &str) -> Result<Sections, ConfigError> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(format!("line {lineno}"), "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::new(
                    name,
                    "unknown section (expected model, grid, time, initial or output)",
                ));
            }
            out.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(format!("line {lineno}"), "expected `key = value`"))?;
        let section = current
            .as_ref()
            .ok_or_else(|| ConfigError::new(format!("line {lineno}"), "key outside of any section"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::new(format!("line {lineno}"), "empty key"));
        }
        let entries = out.get_mut(section).expect("section inserted");
        if entries.insert(key.to_string(), unquote(value).to_string()).is_some() {
            return Err(ConfigError::new(format!("{section}.{key}"), "duplicate key"));
        }
    }
    Ok(out)
}

struct Reader {
    section: &'static str,
    entries: BTreeMap<String, String>,
}

impl Reader {
    fn new(sections: &mut Sections, section: &'static str) -> Self {
        Reader { section, entries: sections.remove(section).unwrap_or_default() }
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.section)
    }

    fn take<T: FromStr>(&mut self, k: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.remove(k) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| ConfigError::new(self.key(k), format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn take_f64(&mut self, k: &str, default: f64) -> Result<f64, ConfigError> {
        let v: f64 = self.take(k, default)?;
        if v.is_nan() && default.is_nan() {
            return Ok(v);
        }
        if !v.is_finite() {
            return Err(ConfigError::new(self.key(k), format!("must be finite, got {v}")));
        }
        Ok(v)
    }

    fn take_string(&mut self, k: &str) -> Option<String> {
        self.entries.remove(k)
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_iter().next() {
            Some((k, _)) => Err(ConfigError::new(format!("{}.{k}", self.section), "unknown key")),
            None => Ok(()),
        }
    }
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<SimConfig, ConfigError> {
        let mut sections = tokenize(text)?;
        let d = SimConfig::default();

        let mut r = Reader::new(&mut sections, "model");
        let potential = r.take_string("potential");
        let name = r.take_string("name").unwrap_or_else(|| {
            if potential.is_some() { "custom".into() } else { d.model.name.clone() }
        });
        let hbar = r.take_f64("hbar", d.model.hbar)?;
        let m = r.take_f64("m", d.model.m)?;
        let rho_floor = r.take_f64("rho_floor", d.model.rho_floor)?;
        let regularize = r.take("regularize", d.model.regularize)?;
        let mut params = BTreeMap::new();
        for k in r.entries.keys().cloned().collect::<Vec<_>>() {
            params.insert(k.clone(), r.take_f64(&k, f64::NAN)?);
        }
        r.finish()?;
        let model = ModelSection { name, potential, hbar, m, params, rho_floor, regularize };

        let mut r = Reader::new(&mut sections, "grid");
        let grid = GridSection { length: r.take_f64("L", d.grid.length)?, points: r.take("N", d.grid.points)? };
        r.finish()?;

        let mut r = Reader::new(&mut sections, "time");
        let time = TimeSection {
            dt: r.take_f64("dt", d.time.dt)?,
            t_final: r.take_f64("T", d.time.t_final)?,
            snapshot_every: r.take("snapshot_every", d.time.snapshot_every)?,
        };
        r.finish()?;

        let mut r = Reader::new(&mut sections, "initial");
        let mut initial = InitialSection {
            kind: r.take_string("kind").unwrap_or(d.initial.kind.clone()),
            background: r.take_f64("background", d.initial.background)?,
            amplitude: r.take_f64("amplitude", d.initial.amplitude)?,
            width: r.take_f64("width", d.initial.width)?,
            momentum: r.take_f64("momentum", d.initial.momentum)?,
            center: r.take_f64("center", f64::NAN)?,
        };
        if initial.center.is_nan() {
            initial.center = grid.length / 2.0;
        }
        r.finish()?;

        let mut r = Reader::new(&mut sections, "output");
        let output = OutputSection {
            dir: r.take_string("dir").unwrap_or(d.output.dir.clone()),
            equation: r.take("equation", d.output.equation)?,
            norm_tolerance: r.take_f64("norm_tolerance", d.output.norm_tolerance)?,
            gauge_density_tolerance: r.take_f64("gauge_density_tolerance", d.output.gauge_density_tolerance)?,
        };
        r.finish()?;

        let cfg = SimConfig { model, grid, time, initial, output };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn params(&self) -> Params {
        let mut p = Params::new(self.model.hbar, self.model.m).unwrap_or_default();
        for (k, v) in &self.model.params {
            p.set(k, *v);
        }
        p
    }

    /// The selected potential; `model.name`/`model.potential` errors are
    /// reported against those keys.
    pub fn potential_model(&self) -> Result<PotentialModel, ConfigError> {
        let kind = match self.model.name.as_str() {
            "custom" => ModelKind::Custom,
            name => name
                .parse()
                .map_err(|e: crate::models::ModelError| ConfigError::new("model.name", format!("{e} or custom")))?,
        };
        match (kind, &self.model.potential) {
            (ModelKind::Custom, Some(text)) => {
                let u = parse_potential(text).map_err(|e| ConfigError::new("model.potential", e.to_string()))?;
                Ok(PotentialModel::custom(u))
            }
            (ModelKind::Custom, None) => Err(ConfigError::new("model.potential", "required when model.name = custom")),
            (_, Some(_)) => Err(ConfigError::new("model.potential", "only allowed with model.name = custom")),
            (kind, None) => Ok(PotentialModel::new(kind)),
        }
    }

    pub fn initial_data(&self) -> InitialData {
        let i = &self.initial;
        match i.kind.as_str() {
            "plane_wave" => InitialData::PlaneWave { background: i.background, momentum: i.momentum },
            _ => InitialData::GaussianOnBackground {
                background: i.background,
                amplitude: i.amplitude,
                width: i.width,
                momentum: i.momentum,
                center: i.center,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn err(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
            ConfigError::new(key, message)
        }
        if self.model.hbar <= 0.0 {
            return Err(err("model.hbar", "must be > 0"));
        }
        if self.model.m <= 0.0 {
            return Err(err("model.m", "must be > 0"));
        }
        if self.model.rho_floor < 0.0 {
            return Err(err("model.rho_floor", "must be >= 0"));
        }
        let model = self.potential_model()?;
        if !crate::variational::check_conservation(&model.u) {
            return Err(err("model.potential", "depends on S itself, so the particle number is not conserved"));
        }
        for name in self.model.params.keys() {
            if !model.params.contains(name) {
                return Err(err(format!("model.{name}"), format!("not a parameter of model `{}`", self.model.name)));
            }
        }
        if let Some(p) = model.missing_parameter(&self.params()) {
            return Err(err(format!("model.{p}"), "missing parameter"));
        }
        if self.grid.length <= 0.0 {
            return Err(err("grid.L", "must be > 0"));
        }
        let n = self.grid.points;
        if !n.is_power_of_two() || n < MIN_POINTS {
            return Err(err("grid.N", format!("must be a power of two >= {MIN_POINTS}, got {n}")));
        }
        if self.time.dt <= 0.0 {
            return Err(err("time.dt", "must be > 0"));
        }
        if self.time.t_final < self.time.dt {
            return Err(err("time.T", "must be >= time.dt"));
        }
        if self.time.snapshot_every == 0 {
            return Err(err("time.snapshot_every", "must be >= 1"));
        }
        let i = &self.initial;
        if !matches!(i.kind.as_str(), "gaussian_on_background" | "plane_wave") {
            return Err(err("initial.kind", format!("expected gaussian_on_background or plane_wave, got `{}`", i.kind)));
        }
        if i.background < 0.0 {
            return Err(err("initial.background", "must be >= 0"));
        }
        if i.background == 0.0 && !model.u.is_zero() {
            return Err(err("initial.background", "must be > 0 for a nonzero potential"));
        }
        if i.width <= 0.0 {
            return Err(err("initial.width", "must be > 0"));
        }
        for (key, v) in [
            ("output.norm_tolerance", self.output.norm_tolerance),
            ("output.gauge_density_tolerance", self.output.gauge_density_tolerance),
        ] {
            if v < 0.0 {
                return Err(err(key, "must be >= 0"));
            }
        }
        if self.output.equation.runs_phi() && model.phi_rhs.is_none() {
            return Err(err("output.equation", format!("model `{}` has no closed-form phi-equation", self.model.name)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_comments() {
        let cfg = SimConfig::parse("# nothing\n[model]\nname = dg  # doebner-goldin\nD = 0.05\n").unwrap();
        assert_eq!(cfg.model.params["D"], 0.05);
        assert_eq!(cfg.grid.points, 512);
        assert_eq!(cfg.initial.center, 20.0);
        assert_eq!(cfg.output.equation, EquationChoice::Psi);
    }

    #[test]
    fn bad_grid_size_names_key() {
        let e = SimConfig::parse("[grid]\nN = 100\n").unwrap_err();
        assert_eq!(e.key, "grid.N");
    }

    #[test]
    fn unknown_and_missing_keys() {
        assert_eq!(SimConfig::parse("[time]\nsteps = 3\n").unwrap_err().key, "time.steps");
        assert_eq!(SimConfig::parse("[model]\nname = dg\n").unwrap_err().key, "model.D");
        assert_eq!(SimConfig::parse("[model]\nname = dg\nD = 0.1\nkappa = 1\n").unwrap_err().key, "model.kappa");
        assert_eq!(SimConfig::parse("[bogus]\n").unwrap_err().key, "bogus");
        assert_eq!(SimConfig::parse("[time]\ndt = 0\n").unwrap_err().key, "time.dt");
        assert_eq!(SimConfig::parse("[time]\ndt = x\n").unwrap_err().key, "time.dt");
        assert_eq!(SimConfig::parse("[grid]\nN = 64\nN = 64\n").unwrap_err().key, "grid.N");
        assert_eq!(SimConfig::parse("N = 64\n").unwrap_err().key, "line 1");
    }

    #[test]
    fn custom_potential() {
        let cfg = SimConfig::parse("[model]\npotential = \"a*rho^2\"\na = 0.1\n").unwrap();
        assert_eq!(cfg.model.name, "custom");
        assert_eq!(cfg.potential_model().unwrap().kind, ModelKind::Custom);
        let e = SimConfig::parse("[model]\npotential = \"rho^2\"\n[output]\nequation = phi\n").unwrap_err();
        assert_eq!(e.key, "output.equation");
        assert_eq!(SimConfig::parse("[model]\npotential = \"rho^\"\n").unwrap_err().key, "model.potential");
    }
}
