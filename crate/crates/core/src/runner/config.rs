//! Plain-text `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys are case-sensitive and
//! unknown keys are rejected. Keys that only make sense for the other method
//! or for a non-custom preset are rejected too.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Result, TopOptError};
use crate::grid_fem::LinearSolver;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Simp,
    Beso,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Cantilever,
    ShortCantilever,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    /// ASCII graymap.
    P2,
    /// Binary graymap.
    P5,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Simp => "simp",
            Method::Beso => "beso",
        }
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Cantilever => "cantilever",
            Preset::ShortCantilever => "short_cantilever",
            Preset::Custom => "custom",
        }
    }
}

impl ImageFormat {
    pub fn name(self) -> &'static str {
        match self {
            ImageFormat::P2 => "p2",
            ImageFormat::P5 => "p5",
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "simp" => Ok(Method::Simp),
            "beso" => Ok(Method::Beso),
            _ => Err(format!("expected `simp` or `beso`, got `{s}`")),
        }
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cantilever" => Ok(Preset::Cantilever),
            "short_cantilever" => Ok(Preset::ShortCantilever),
            "custom" => Ok(Preset::Custom),
            _ => Err(format!(
                "expected `cantilever`, `short_cantilever` or `custom`, got `{s}`"
            )),
        }
    }
}

impl FromStr for ImageFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "p2" => Ok(ImageFormat::P2),
            "p5" => Ok(ImageFormat::P5),
            _ => Err(format!("expected `p2` or `p5`, got `{s}`")),
        }
    }
}

/// Fully resolved run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub preset: Preset,
    pub nelx: usize,
    pub nely: usize,
    pub volfrac: f64,
    pub penal: f64,
    pub rmin: f64,
    pub nu: f64,
    pub e0: f64,
    pub emin: f64,
    pub rho_min: f64,
    pub max_iters: usize,
    pub solver: LinearSolver,
    pub simp: SimpKnobs,
    pub beso: BesoKnobs,
    /// Load placement, only configurable for the custom preset.
    pub load: PointLoad,
    pub output: PathBuf,
    pub image_format: ImageFormat,
    /// Log every n-th iteration; 0 logs only the final one.
    pub log_every: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpKnobs {
    pub move_limit: f64,
    pub eta: f64,
    pub change_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesoKnobs {
    pub er: f64,
    pub strict_swap: bool,
    pub stability_window: usize,
    pub stability_tol: f64,
}

/// Point load at grid node `(node_x, node_y)` with force components `(fx, fy)`,
/// `fy` positive upward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointLoad {
    pub node_x: usize,
    pub node_y: usize,
    pub fx: f64,
    pub fy: f64,
}

/// A parsed configuration and the keys that were filled from defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedConfig {
    pub config: RunConfig,
    pub defaults: Vec<(&'static str, String)>,
}

const KEYS: &[&str] = &[
    "method",
    "preset",
    "nelx",
    "nely",
    "volfrac",
    "penal",
    "rmin",
    "nu",
    "E0",
    "Emin",
    "rho_min",
    "max_iters",
    "solver",
    "move",
    "eta",
    "change_tol",
    "er",
    "strict_swap",
    "stability_window",
    "stability_tol",
    "load_node_x",
    "load_node_y",
    "load_fx",
    "load_fy",
    "output",
    "image_format",
    "log_every",
];

const SIMP_ONLY: &[&str] = &["move", "eta", "change_tol"];
const BESO_ONLY: &[&str] = &["er", "strict_swap", "stability_window", "stability_tol"];
const CUSTOM_ONLY: &[&str] = &["load_node_x", "load_node_y", "load_fx", "load_fy"];

struct Entries {
    values: BTreeMap<&'static str, (String, usize)>,
    defaults: Vec<(&'static str, String)>,
}

impl Entries {
    fn err(key: &str, line: usize, message: impl Into<String>) -> TopOptError {
        TopOptError::Config {
            key: key.to_string(),
            line,
            message: message.into(),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |(_, l)| *l)
    }

    fn get<V>(&mut self, key: &'static str, default: V) -> Result<V>
    where
        V: FromStr + fmt::Display,
        V::Err: fmt::Display,
    {
        match self.values.get(key) {
            Some((raw, line)) => raw
                .parse::<V>()
                .map_err(|e| Self::err(key, *line, format!("cannot parse `{raw}`: {e}"))),
            None => {
                self.defaults.push((key, default.to_string()));
                Ok(default)
            }
        }
    }

    fn require(&self, key: &str, ok: bool, what: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Self::err(
                key,
                self.line_of(key),
                format!("value must be {what}"),
            ))
        }
    }
}

struct Solver(LinearSolver);

impl FromStr for Solver {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cholesky" => Ok(Solver(LinearSolver::Cholesky)),
            "pcg" => Ok(Solver(LinearSolver::Pcg)),
            _ => Err(format!("expected `cholesky` or `pcg`, got `{s}`")),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(solver_name(self.0))
    }
}

fn solver_name(s: LinearSolver) -> &'static str {
    match s {
        LinearSolver::Cholesky => "cholesky",
        LinearSolver::Pcg => "pcg",
    }
}

macro_rules! display_via_name {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    )*};
}
display_via_name!(Method, Preset, ImageFormat);

struct Path(PathBuf);

impl FromStr for Path {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.is_empty() {
            Err("empty path".into())
        } else {
            Ok(Path(PathBuf::from(s)))
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.display())
    }
}

/// Float wrapper whose textual form round-trips exactly.
struct Real(f64);

impl FromStr for Real {
    type Err = std::num::ParseFloatError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.parse().map(Real)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

struct PresetDefaults {
    dims: Option<(usize, usize)>,
    volfrac: f64,
    rmin: f64,
    nu: f64,
}

fn preset_defaults(preset: Preset) -> PresetDefaults {
    match preset {
        Preset::Cantilever => PresetDefaults {
            dims: Some((80, 40)),
            volfrac: 0.4,
            rmin: 1.3,
            nu: 0.22,
        },
        Preset::ShortCantilever => PresetDefaults {
            dims: Some((40, 80)),
            volfrac: 0.25,
            rmin: 1.5,
            nu: 0.3,
        },
        Preset::Custom => PresetDefaults {
            dims: None,
            volfrac: 0.5,
            rmin: 1.5,
            nu: 0.3,
        },
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<&'static str, (String, usize)>> {
    let mut values = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Entries::err(content, line, "expected `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(Entries::err(key, line, "unknown key"));
        };
        if values.insert(known, (value.to_string(), line)).is_some() {
            return Err(Entries::err(key, line, "duplicate key"));
        }
    }
    Ok(values)
}

/// Parses and validates a configuration, applying defaults for absent keys.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut e = Entries {
        values: tokenize(text)?,
        defaults: Vec::new(),
    };
    let method: Method = e.get("method", Method::Simp)?;
    let preset: Preset = e.get("preset", Preset::Cantilever)?;

    let foreign: &[&str] = match method {
        Method::Simp => BESO_ONLY,
        Method::Beso => SIMP_ONLY,
    };
    for &key in foreign {
        if e.values.contains_key(key) {
            return Err(Entries::err(
                key,
                e.line_of(key),
                format!("not applicable to method `{method}`"),
            ));
        }
    }
    if preset != Preset::Custom {
        for &key in CUSTOM_ONLY {
            if e.values.contains_key(key) {
                return Err(Entries::err(
                    key,
                    e.line_of(key),
                    "load placement is only configurable with preset `custom`",
                ));
            }
        }
    }

    let pd = preset_defaults(preset);
    let (nelx, nely) = match pd.dims {
        Some((x, y)) => (e.get("nelx", x)?, e.get("nely", y)?),
        None => {
            for key in ["nelx", "nely"] {
                if !e.values.contains_key(key) {
                    return Err(Entries::err(key, 0, "required for preset `custom`"));
                }
            }
            (e.get("nelx", 0)?, e.get("nely", 0)?)
        }
    };
    e.require("nelx", nelx >= 1, "at least 1")?;
    e.require("nely", nely >= 1, "at least 1")?;

    let volfrac = e.get("volfrac", Real(pd.volfrac))?.0;
    match method {
        Method::Simp => e.require("volfrac", volfrac > 0.0 && volfrac <= 1.0, "in (0, 1]")?,
        Method::Beso => e.require("volfrac", volfrac > 0.0 && volfrac < 1.0, "in (0, 1)")?,
    }
    let penal = e.get("penal", Real(3.0))?.0;
    e.require(
        "penal",
        penal >= 1.0 && penal.is_finite(),
        "finite and >= 1",
    )?;
    let rmin = e.get("rmin", Real(pd.rmin))?.0;
    e.require(
        "rmin",
        rmin > 0.0 && rmin.is_finite(),
        "positive and finite",
    )?;
    let nu = e.get("nu", Real(pd.nu))?.0;
    e.require("nu", (0.0..0.5).contains(&nu), "in [0, 0.5)")?;
    let e0 = e.get("E0", Real(1.0))?.0;
    e.require("E0", e0 > 0.0 && e0.is_finite(), "positive and finite")?;
    let emin = e.get("Emin", Real(1e-9 * e0))?.0;
    e.require("Emin", emin > 0.0 && emin < e0, "in (0, E0)")?;
    let rho_min = e.get("rho_min", Real(1e-3))?.0;
    e.require("rho_min", rho_min > 0.0 && rho_min < 1.0, "in (0, 1)")?;
    if method == Method::Simp {
        e.require("rho_min", rho_min <= volfrac, "at most volfrac")?;
    }
    let max_iters: usize = e.get("max_iters", 200)?;
    e.require("max_iters", max_iters >= 1, "at least 1")?;
    let solver = e.get("solver", Solver(LinearSolver::Cholesky))?.0;

    let mut simp = SimpKnobs {
        move_limit: 0.2,
        eta: 0.5,
        change_tol: 0.01,
    };
    let mut beso = BesoKnobs {
        er: 0.02,
        strict_swap: false,
        stability_window: 10,
        stability_tol: 1e-3,
    };
    match method {
        Method::Simp => {
            simp.move_limit = e.get("move", Real(simp.move_limit))?.0;
            e.require(
                "move",
                simp.move_limit > 0.0 && simp.move_limit <= 1.0,
                "in (0, 1]",
            )?;
            simp.eta = e.get("eta", Real(simp.eta))?.0;
            e.require("eta", simp.eta > 0.0 && simp.eta <= 1.0, "in (0, 1]")?;
            simp.change_tol = e.get("change_tol", Real(simp.change_tol))?.0;
            e.require("change_tol", simp.change_tol > 0.0, "positive")?;
        }
        Method::Beso => {
            beso.er = e.get("er", Real(beso.er))?.0;
            e.require("er", (0.0..1.0).contains(&beso.er), "in [0, 1)")?;
            beso.strict_swap = e.get("strict_swap", beso.strict_swap)?;
            beso.stability_window = e.get("stability_window", beso.stability_window)?;
            e.require(
                "stability_window",
                beso.stability_window >= 2 && beso.stability_window.is_multiple_of(2),
                "an even number >= 2",
            )?;
            beso.stability_tol = e.get("stability_tol", Real(beso.stability_tol))?.0;
            e.require("stability_tol", beso.stability_tol > 0.0, "positive")?;
        }
    }

    let mut load = PointLoad {
        node_x: nelx,
        node_y: nely / 2,
        fx: 0.0,
        fy: -1.0,
    };
    if preset == Preset::Custom {
        load.node_x = e.get("load_node_x", load.node_x)?;
        e.require(
            "load_node_x",
            load.node_x <= nelx,
            "a node column in [0, nelx]",
        )?;
        load.node_y = e.get("load_node_y", load.node_y)?;
        e.require(
            "load_node_y",
            load.node_y <= nely,
            "a node row in [0, nely]",
        )?;
        load.fx = e.get("load_fx", Real(load.fx))?.0;
        e.require("load_fx", load.fx.is_finite(), "finite")?;
        load.fy = e.get("load_fy", Real(load.fy))?.0;
        e.require("load_fy", load.fy.is_finite(), "finite")?;
        e.require("load_node_x", load.node_x > 0, "off the clamped left edge")?;
    }

    let output = e.get("output", Path(PathBuf::from("out")))?.0;
    let image_format = e.get("image_format", ImageFormat::P2)?;
    let log_every = e.get("log_every", 1usize)?;

    Ok(ParsedConfig {
        config: RunConfig {
            method,
            preset,
            nelx,
            nely,
            volfrac,
            penal,
            rmin,
            nu,
            e0,
            emin,
            rho_min,
            max_iters,
            solver,
            simp,
            beso,
            load,
            output,
            image_format,
            log_every,
        },
        defaults: e.defaults,
    })
}

impl RunConfig {
    /// Default configuration of a preset for the given method.
    pub fn preset_default(method: Method, preset: Preset) -> Result<Self> {
        if preset == Preset::Custom {
            return Err(TopOptError::UnknownPreset(
                "custom (needs explicit nelx and nely)".into(),
            ));
        }
        parse_config(&format!("method = {method}\npreset = {preset}\n")).map(|p| p.config)
    }

    /// Serializes every applicable key; parsing the result yields `self`.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("method", &self.method);
        kv("preset", &self.preset);
        kv("nelx", &self.nelx);
        kv("nely", &self.nely);
        kv("volfrac", &Real(self.volfrac));
        kv("penal", &Real(self.penal));
        kv("rmin", &Real(self.rmin));
        kv("nu", &Real(self.nu));
        kv("E0", &Real(self.e0));
        kv("Emin", &Real(self.emin));
        kv("rho_min", &Real(self.rho_min));
        kv("max_iters", &self.max_iters);
        kv("solver", &Solver(self.solver));
        match self.method {
            Method::Simp => {
                kv("move", &Real(self.simp.move_limit));
                kv("eta", &Real(self.simp.eta));
                kv("change_tol", &Real(self.simp.change_tol));
            }
            Method::Beso => {
                kv("er", &Real(self.beso.er));
                kv("strict_swap", &self.beso.strict_swap);
                kv("stability_window", &self.beso.stability_window);
                kv("stability_tol", &Real(self.beso.stability_tol));
            }
        }
        if self.preset == Preset::Custom {
            kv("load_node_x", &self.load.node_x);
            kv("load_node_y", &self.load.node_y);
            kv("load_fx", &Real(self.load.fx));
            kv("load_fy", &Real(self.load.fy));
        }
        kv("output", &self.output.display());
        kv("image_format", &self.image_format);
        kv("log_every", &self.log_every);
        s
    }
}
