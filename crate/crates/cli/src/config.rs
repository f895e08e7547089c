//! Run configuration: sections of `key = value` lines plus `section.key=value` overrides.
//!
//! Every recognised key and its default lives in [`KEYS`]; the help text and
//! the fallback values are both read from it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use embedded_fem::analysis::{GmresConfig, LinearSolverKind, NewtonConfig, OptimizeConfig};
use embedded_fem::discretization::{Mesh, Region, SliderGeometry};
use embedded_fem::morphing::{ShapeMode, ShapeParams};
use embedded_fem::physics::{
    BcValue, DirichletBc, Geometry, Material, MaterialTable, ModelConfig, PSI, TEMP,
};
use ini::Ini;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing required section [{0}]")]
    MissingSection(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key {section}.{key}")]
    UnknownKey { section: String, key: String },
    #[error("invalid value for {section}.{key}: {message}")]
    Invalid {
        section: String,
        key: String,
        message: String,
    },
    #[error("override {0:?} is not of the form section.key=value")]
    Override(String),
}

pub struct Key {
    pub section: &'static str,
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(
    section: &'static str,
    name: &'static str,
    default: &'static str,
    help: &'static str,
) -> Key {
    Key {
        section,
        name,
        default,
        help,
    }
}

pub const KEYS: &[Key] = &[
    key(
        "run",
        "mode",
        "solve",
        "solve | continuation | optimize | uq | verify",
    ),
    key(
        "run",
        "output",
        "out",
        "output directory, relative to the config file",
    ),
    key("run", "threads", "1", "assembly worker threads"),
    key(
        "run",
        "workset_size",
        "32",
        "elements per workset, 0 for one per region",
    ),
    key("mesh", "geometry", "slider", "slider | rectangle | file"),
    key("mesh", "file", "", "mesh text file for geometry = file"),
    key("mesh", "quad_order", "2", "Gauss points per direction"),
    key(
        "mesh",
        "conductor_length",
        "1",
        "slider strip: conductor length",
    ),
    key("mesh", "pad_length", "0.1", "slider strip: pad length"),
    key(
        "mesh",
        "slider_half_length",
        "0.5",
        "slider strip: half slider length",
    ),
    key("mesh", "height", "1", "slider strip: height"),
    key(
        "mesh",
        "nx_conductor",
        "8",
        "slider strip: conductor element columns",
    ),
    key("mesh", "nx_pad", "2", "slider strip: pad element columns"),
    key(
        "mesh",
        "nx_slider",
        "6",
        "slider strip: slider element columns",
    ),
    key("mesh", "ny", "16", "element rows (both geometries)"),
    key("mesh", "lx", "1", "rectangle: width"),
    key("mesh", "ly", "1", "rectangle: height"),
    key("mesh", "nx", "8", "rectangle: element columns"),
    key(
        "mesh",
        "region",
        "conductor",
        "rectangle: material region of every element",
    ),
    key(
        "materials",
        "conductor_sigma0",
        "100",
        "electrical conductivity at T0",
    ),
    key("materials", "conductor_kappa", "1", "thermal conductivity"),
    key(
        "materials",
        "conductor_beta",
        "0.2",
        "temperature coefficient of resistivity",
    ),
    key("materials", "conductor_t0", "0", "reference temperature"),
    key("materials", "conductor_vx", "10", "transport velocity, x"),
    key("materials", "conductor_vy", "0", "transport velocity, y"),
    key(
        "materials",
        "pad_sigma0",
        "35",
        "initial value of the SigmaPad parameter",
    ),
    key("materials", "pad_kappa", "1", ""),
    key("materials", "pad_beta", "0.2", ""),
    key("materials", "pad_t0", "0", ""),
    key("materials", "pad_vx", "0", ""),
    key("materials", "pad_vy", "0", ""),
    key("materials", "slider_sigma0", "100", ""),
    key("materials", "slider_kappa", "1", ""),
    key("materials", "slider_beta", "0.2", ""),
    key("materials", "slider_t0", "0", ""),
    key("materials", "slider_vx", "0", ""),
    key("materials", "slider_vy", "0", ""),
    key(
        "source",
        "alpha",
        "0",
        "constant heat source (parameter Alpha)",
    ),
    key(
        "source",
        "beta_s",
        "0",
        "quadratic heat source coefficient (parameter Beta)",
    ),
    key(
        "bc",
        "<psi|T>.<node set>",
        "",
        "Dirichlet value; the section replaces the geometry's default set",
    ),
    key("solver", "abs_tol", "1e-10", "absolute residual tolerance"),
    key(
        "solver",
        "rel_tol",
        "1e-14",
        "tolerance relative to the initial residual",
    ),
    key("solver", "max_iters", "25", "Newton iteration cap"),
    key(
        "solver",
        "max_backtracks",
        "10",
        "step halvings per Newton iteration, 0 for full steps",
    ),
    key("solver", "linear", "auto", "auto | dense | gmres"),
    key("solver", "gmres_restart", "50", ""),
    key("solver", "gmres_tol", "1e-12", ""),
    key("solver", "gmres_max_iters", "2000", ""),
    key(
        "continuation",
        "parameter",
        "SigmaPad",
        "model parameter name, or shape",
    ),
    key("continuation", "start", "20", ""),
    key("continuation", "end", "50", ""),
    key(
        "continuation",
        "steps",
        "7",
        "uniformly spaced values including both ends",
    ),
    key(
        "shape",
        "params",
        "1",
        "1: common deflection, 2: independent top and bottom",
    ),
    key(
        "shape",
        "lower",
        "-0.2",
        "lower bound of every shape parameter",
    ),
    key(
        "shape",
        "upper",
        "0.2",
        "upper bound of every shape parameter",
    ),
    key("shape", "initial", "0.1", "comma-separated starting point"),
    key("optimize", "tol", "1e-6", "projected gradient tolerance"),
    key(
        "optimize",
        "min_step",
        "1e-8",
        "stop when an accepted step is shorter",
    ),
    key("optimize", "max_iters", "50", ""),
    key(
        "optimize",
        "sweep_points",
        "21",
        "continuation sweep over the bounds for cross-checking, 0 to skip",
    ),
    key("uq", "parameter", "SigmaPad", "uncertain model parameter"),
    key(
        "uq",
        "coeffs",
        "35,15",
        "Legendre chaos coefficients of the parameter",
    ),
    key(
        "uq",
        "degree",
        "3",
        "chaos degree of the stochastic Galerkin solve",
    ),
    key(
        "uq",
        "nisp_order",
        "6",
        "Gauss points of the projection oracle, 0 to skip",
    ),
    key(
        "verify",
        "fd_states",
        "5",
        "random states for the Jacobian check",
    ),
    key("verify", "seed", "7", ""),
    key(
        "verify",
        "mms_sizes",
        "8,16,32",
        "grids of the manufactured-solution study",
    ),
];

/// Help text listing every key with its default.
pub fn keys_help() -> String {
    let mut s = String::from("CONFIG KEYS (section.key = default):\n");
    let mut section = "";
    for k in KEYS {
        if k.section != section {
            section = k.section;
            let _ = writeln!(s, "  [{section}]");
        }
        let default = if k.default.is_empty() {
            "(none)"
        } else {
            k.default
        };
        let line = format!("    {:<22} = {:<10}  {}", k.name, default, k.help);
        s.push_str(line.trim_end());
        s.push('\n');
    }
    s.push_str("  Modes continuation, optimize and uq require their own section.\n");
    s
}

fn default_of(section: &str, name: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|k| k.section == section && k.name == name)
        .map(|k| k.default)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Continuation,
    Optimize,
    Uq,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Continuation => "continuation",
            Mode::Optimize => "optimize",
            Mode::Uq => "uq",
            Mode::Verify => "verify",
        }
    }

    fn required_section(self) -> Option<&'static str> {
        match self {
            Mode::Continuation => Some("continuation"),
            Mode::Optimize => Some("shape"),
            Mode::Uq => Some("uq"),
            Mode::Solve | Mode::Verify => None,
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [
            Mode::Solve,
            Mode::Continuation,
            Mode::Optimize,
            Mode::Uq,
            Mode::Verify,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

/// Raw sections after overrides, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct Document {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    base_dir: PathBuf,
}

impl Document {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Document, ConfigError> {
        let ini =
            Ini::load_from_str_noescape(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut doc = Document {
            base_dir: base_dir.to_path_buf(),
            ..Default::default()
        };
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(ConfigError::Parse(format!("key {k:?} outside any section")));
                }
                continue;
            };
            let entry = doc.sections.entry(section.to_string()).or_default();
            for (k, v) in props.iter() {
                entry.insert(k.to_string(), v.to_string());
            }
        }
        doc.check_keys()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Document, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Document::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// `section.key=value`; creates the section when absent.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (lhs, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(spec.into()))?;
        let (section, key) = lhs
            .trim()
            .split_once('.')
            .ok_or_else(|| ConfigError::Override(spec.into()))?;
        if section.is_empty() || key.is_empty() {
            return Err(ConfigError::Override(spec.into()));
        }
        self.sections
            .entry(section.into())
            .or_default()
            .insert(key.into(), value.trim().into());
        self.check_keys()
    }

    fn check_keys(&self) -> Result<(), ConfigError> {
        for (section, props) in &self.sections {
            if !KEYS.iter().any(|k| k.section == section) {
                return Err(ConfigError::UnknownSection(section.clone()));
            }
            if section == "bc" {
                continue;
            }
            for key in props.keys() {
                if default_of(section, key).is_none() {
                    return Err(ConfigError::UnknownKey {
                        section: section.clone(),
                        key: key.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn has_section(&self, s: &str) -> bool {
        self.sections.contains_key(s)
    }

    fn raw(&self, section: &str, key: &str) -> &str {
        self.sections
            .get(section)
            .and_then(|p| p.get(key))
            .map(String::as_str)
            .or_else(|| default_of(section, key))
            .unwrap_or_else(|| panic!("{section}.{key} is not in the key table"))
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(section, key);
        raw.parse::<T>()
            .map_err(|e| invalid(section, key, format!("{raw:?}: {e}")))
    }

    fn list(&self, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.raw(section, key)
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(section, key, format!("{t:?}: {e}")))
            })
            .collect()
    }

    pub fn to_run_config(&self) -> Result<RunConfig, ConfigError> {
        if !self.has_section("run") {
            return Err(ConfigError::MissingSection("run".into()));
        }
        let mode: Mode = self.get("run", "mode")?;
        if let Some(s) = mode.required_section() {
            if !self.has_section(s) {
                return Err(ConfigError::MissingSection(s.into()));
            }
        }
        let model = self.model()?;
        let newton = self.newton()?;
        newton
            .validate()
            .map_err(|m| invalid("solver", "abs_tol", m))?;
        let continuation = ContinuationSettings {
            parameter: self.get("continuation", "parameter")?,
            start: self.get("continuation", "start")?,
            end: self.get("continuation", "end")?,
            steps: self.get("continuation", "steps")?,
        };
        let shape = self.shape()?;
        let optimize = OptimizeSettings {
            config: OptimizeConfig {
                tol: positive(self, "optimize", "tol")?,
                min_step: positive(self, "optimize", "min_step")?,
                max_iters: self.get("optimize", "max_iters")?,
                ..OptimizeConfig::default()
            },
            sweep_points: self.get("optimize", "sweep_points")?,
        };
        let uq = UqSettings {
            parameter: self.get("uq", "parameter")?,
            coeffs: self.list("uq", "coeffs")?,
            degree: self.get("uq", "degree")?,
            nisp_order: self.get("uq", "nisp_order")?,
        };
        if uq.coeffs.len() > uq.degree + 1 {
            return Err(invalid(
                "uq",
                "coeffs",
                format!(
                    "{} coefficients exceed degree {}",
                    uq.coeffs.len(),
                    uq.degree
                ),
            ));
        }
        let verify = VerifySettings {
            fd_states: self.get("verify", "fd_states")?,
            seed: self.get("verify", "seed")?,
            mms_sizes: self
                .list("verify", "mms_sizes")?
                .into_iter()
                .map(|v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(invalid("verify", "mms_sizes", format!("{v}")))
                    }
                })
                .collect::<Result<_, _>>()?,
        };
        let output: String = self.get("run", "output")?;
        Ok(RunConfig {
            mode,
            output: self.base_dir.join(output),
            model,
            newton,
            continuation,
            shape,
            optimize,
            uq,
            verify,
        })
    }

    fn model(&self) -> Result<ModelConfig, ConfigError> {
        let ny: usize = self.get("mesh", "ny")?;
        let geometry_kind: String = self.get("mesh", "geometry")?;
        let geometry = match geometry_kind.as_str() {
            "slider" => Geometry::Slider(SliderGeometry {
                conductor_length: self.get("mesh", "conductor_length")?,
                pad_length: self.get("mesh", "pad_length")?,
                slider_half_length: self.get("mesh", "slider_half_length")?,
                height: self.get("mesh", "height")?,
                nx_conductor: self.get("mesh", "nx_conductor")?,
                nx_pad: self.get("mesh", "nx_pad")?,
                nx_slider: self.get("mesh", "nx_slider")?,
                ny,
            }),
            "rectangle" => Geometry::Rectangle {
                lx: self.get("mesh", "lx")?,
                ly: self.get("mesh", "ly")?,
                nx: self.get("mesh", "nx")?,
                ny,
                region: parse_region(self.raw("mesh", "region"))
                    .map_err(|m| invalid("mesh", "region", m))?,
            },
            "file" => {
                let rel: String = self.get("mesh", "file")?;
                if rel.is_empty() {
                    return Err(invalid(
                        "mesh",
                        "file",
                        "required for geometry = file".into(),
                    ));
                }
                let path = self.base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::Read {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                Geometry::Mesh(
                    Mesh::from_text(&text).map_err(|e| invalid("mesh", "file", e.to_string()))?,
                )
            }
            other => {
                return Err(invalid(
                    "mesh",
                    "geometry",
                    format!("unknown geometry {other:?}"),
                ))
            }
        };
        let mut materials = MaterialTable::default();
        for r in Region::ALL {
            let s = r.name();
            let m = |k: &str| self.get::<f64>("materials", &format!("{s}_{k}"));
            *materials.get_mut(r) = Material {
                sigma0: m("sigma0")?,
                kappa: m("kappa")?,
                beta: m("beta")?,
                t0: m("t0")?,
                velocity: [m("vx")?, m("vy")?],
            };
        }
        materials
            .validate()
            .map_err(|msg| invalid("materials", "sigma0", msg))?;
        let bcs = match self.sections.get("bc") {
            Some(props) => props
                .iter()
                .map(|(k, v)| parse_bc(k, v))
                .collect::<Result<_, _>>()?,
            None => match &geometry {
                Geometry::Slider(_) => ModelConfig::demo().bcs,
                Geometry::Rectangle { .. } => vec![
                    DirichletBc::constant("left", PSI, 0.0),
                    DirichletBc::constant("right", PSI, 1.0),
                    DirichletBc::constant("boundary", TEMP, 0.0),
                ],
                Geometry::Mesh(_) => return Err(ConfigError::MissingSection("bc".into())),
            },
        };
        Ok(ModelConfig {
            geometry,
            materials,
            bcs,
            alpha: self.get("source", "alpha")?,
            beta_s: self.get("source", "beta_s")?,
            quad_order: self.get("mesh", "quad_order")?,
            workset_size: self.get("run", "workset_size")?,
            threads: self.get("run", "threads")?,
            forcing: None,
        })
    }

    fn newton(&self) -> Result<NewtonConfig, ConfigError> {
        let linear = match self.raw("solver", "linear") {
            "auto" => LinearSolverKind::Auto,
            "dense" => LinearSolverKind::DenseLu,
            "gmres" => LinearSolverKind::Gmres,
            other => {
                return Err(invalid(
                    "solver",
                    "linear",
                    format!("unknown solver {other:?}"),
                ))
            }
        };
        Ok(NewtonConfig {
            abs_tol: positive(self, "solver", "abs_tol")?,
            rel_tol: positive(self, "solver", "rel_tol")?,
            max_iters: self.get("solver", "max_iters")?,
            max_backtracks: self.get("solver", "max_backtracks")?,
            linear,
            gmres: GmresConfig {
                restart: self.get("solver", "gmres_restart")?,
                tol: positive(self, "solver", "gmres_tol")?,
                max_iters: self.get("solver", "gmres_max_iters")?,
            },
        })
    }

    fn shape(&self) -> Result<ShapeSettings, ConfigError> {
        let mode = match self.get::<usize>("shape", "params")? {
            1 => ShapeMode::OneParam,
            2 => ShapeMode::TwoParam,
            n => return Err(invalid("shape", "params", format!("{n} (expected 1 or 2)"))),
        };
        let (lo, hi): (f64, f64) = (self.get("shape", "lower")?, self.get("shape", "upper")?);
        if !(lo < hi) {
            return Err(invalid(
                "shape",
                "lower",
                format!("bounds [{lo}, {hi}] are empty"),
            ));
        }
        let mut initial = self.list("shape", "initial")?;
        if initial.len() == 1 && mode == ShapeMode::TwoParam {
            initial.push(initial[0]);
        }
        if initial.len() != mode.num_params() {
            return Err(invalid(
                "shape",
                "initial",
                format!("expected {} values", mode.num_params()),
            ));
        }
        Ok(ShapeSettings {
            params: ShapeParams::new(mode, lo, hi),
            initial,
        })
    }
}

fn invalid(section: &str, key: &str, message: String) -> ConfigError {
    ConfigError::Invalid {
        section: section.into(),
        key: key.into(),
        message,
    }
}

fn positive(doc: &Document, section: &str, key: &str) -> Result<f64, ConfigError> {
    let v: f64 = doc.get(section, key)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(section, key, format!("{v} must be positive")))
    }
}

fn parse_region(s: &str) -> Result<Region, String> {
    Region::ALL
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| format!("unknown region {s:?}"))
}

fn parse_bc(key: &str, value: &str) -> Result<DirichletBc, ConfigError> {
    let (eq, set) = key
        .split_once('.')
        .ok_or_else(|| invalid("bc", key, "expected <psi|T>.<node set>".into()))?;
    let eq = match eq {
        "psi" => PSI,
        "T" => TEMP,
        other => return Err(invalid("bc", key, format!("unknown equation {other:?}"))),
    };
    let v: f64 = value
        .parse()
        .map_err(|e| invalid("bc", key, format!("{value:?}: {e}")))?;
    Ok(DirichletBc {
        node_set: set.into(),
        eq,
        value: BcValue::Constant(v),
    })
}

#[derive(Debug, Clone)]
pub struct ContinuationSettings {
    pub parameter: String,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct ShapeSettings {
    pub params: ShapeParams,
    pub initial: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OptimizeSettings {
    pub config: OptimizeConfig,
    pub sweep_points: usize,
}

#[derive(Debug, Clone)]
pub struct UqSettings {
    pub parameter: String,
    pub coeffs: Vec<f64>,
    pub degree: usize,
    pub nisp_order: usize,
}

#[derive(Debug, Clone)]
pub struct VerifySettings {
    pub fd_states: usize,
    pub seed: u64,
    pub mms_sizes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub output: PathBuf,
    pub model: ModelConfig,
    pub newton: NewtonConfig,
    pub continuation: ContinuationSettings,
    pub shape: ShapeSettings,
    pub optimize: OptimizeSettings,
    pub uq: UqSettings,
    pub verify: VerifySettings,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Document {
        Document::parse(text, Path::new("/tmp")).unwrap()
    }

    #[test]
    fn defaults_match_the_library() {
        let c = doc("[run]\n").to_run_config().unwrap();
        let demo = ModelConfig::demo();
        assert_eq!(c.model.geometry, demo.geometry);
        assert_eq!(c.model.materials, demo.materials);
        assert_eq!(c.model.quad_order, demo.quad_order);
        assert_eq!(c.model.workset_size, demo.workset_size);
        assert_eq!((c.model.alpha, c.model.beta_s), (demo.alpha, demo.beta_s));
        assert_eq!(c.newton, NewtonConfig::default());
        let o = OptimizeConfig::default();
        assert_eq!(
            (
                c.optimize.config.tol,
                c.optimize.config.min_step,
                c.optimize.config.max_iters
            ),
            (o.tol, o.min_step, o.max_iters)
        );
        assert_eq!(c.mode, Mode::Solve);
        assert_eq!(c.output, Path::new("/tmp/out"));
    }

    #[test]
    fn missing_sections_are_named() {
        let e = doc("[mesh]\nny = 4\n").to_run_config().unwrap_err();
        assert_eq!(e, ConfigError::MissingSection("run".into()));
        let e = doc("[run]\nmode = uq\n").to_run_config().unwrap_err();
        assert_eq!(e.to_string(), "missing required section [uq]");
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert!(matches!(
            Document::parse("[run]\nmdoe = solve\n", Path::new(".")),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            Document::parse("[nope]\n", Path::new(".")),
            Err(ConfigError::UnknownSection(_))
        ));
        assert!(matches!(
            Document::parse("mode = solve\n", Path::new(".")),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn overrides_replace_and_add() {
        let mut d = doc("[run]\nmode = solve\n");
        d.apply_override("run.mode=continuation").unwrap();
        d.apply_override("continuation.steps = 3").unwrap();
        let c = d.to_run_config().unwrap();
        assert_eq!(c.mode, Mode::Continuation);
        assert_eq!(c.continuation.steps, 3);
        assert!(matches!(
            d.apply_override("steps=3"),
            Err(ConfigError::Override(_))
        ));
        assert!(matches!(
            d.apply_override("run.nope=3"),
            Err(ConfigError::UnknownKey { .. })
        ));
    }

    #[test]
    fn bad_values_name_the_key() {
        let e = doc("[run]\n[solver]\nabs_tol = -1\n")
            .to_run_config()
            .unwrap_err();
        assert!(e.to_string().contains("solver.abs_tol"), "{e}");
        let e = doc("[run]\nthreads = two\n").to_run_config().unwrap_err();
        assert!(e.to_string().contains("run.threads"), "{e}");
    }

    #[test]
    fn bc_section_and_rectangle_defaults() {
        let c = doc("[run]\n[mesh]\ngeometry = rectangle\n[bc]\npsi.left = 0\nT.top = 2\n")
            .to_run_config()
            .unwrap();
        assert_eq!(c.model.bcs.len(), 2);
        assert!(c
            .model
            .bcs
            .iter()
            .any(|b| b.node_set == "top" && b.eq == TEMP));
        let c = doc("[run]\n[mesh]\ngeometry = rectangle\n")
            .to_run_config()
            .unwrap();
        assert_eq!(c.model.bcs.len(), 3);
        assert!(Document::parse("[run]\n[bc]\nq.left = 0\n", Path::new("."))
            .unwrap()
            .to_run_config()
            .is_err());
    }

    #[test]
    fn help_lists_every_key() {
        let h = keys_help();
        for k in KEYS {
            assert!(h.contains(k.name), "{}", k.name);
        }
        assert!(h.contains("abs_tol                = 1e-10"));
    }
}
