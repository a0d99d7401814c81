//! Flat dotted-key config files.
//!
//! A config is a TOML document whose keys are dotted paths, for example
//!
//! ```toml
//! oscillators = 18
//! potential.kind = "tanh"
//! potential.s = 5.0
//! noise.coefficient = 0.05
//! ```
//!
//! Nested tables (`[potential]`) are accepted and flattened to the same
//! paths. Every key not listed in [`KEYS`] is rejected, except keys under
//! `tool.` which carry manifest metadata. Missing keys take the defaults of
//! [`SimulationConfig::default`], scaled to the configured oscillator count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::integrator::IntegratorOptions;
use crate::model::{
    DelaySpec, InitialCondition, MetricKind, NoiseBase, NoiseSpec, OutputSelection, PotentialSpec,
    SimulationConfig, TopologyError,
};
use crate::topology::{self, Direction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` must be {expected}")]
    WrongType { key: String, expected: &'static str },
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("{0}")]
    Io(String),
}

impl ConfigError {
    /// The key path the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::WrongType { key, .. } | ConfigError::InvalidValue { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyType {
    Int,
    Float,
    Bool,
    Str,
    List,
}

/// Every recognized key with its value type.
pub const KEYS: &[(&str, KeyType)] = &[
    ("oscillators", KeyType::Int),
    ("t_comp", KeyType::Float),
    ("t_comm", KeyType::Float),
    ("beta", KeyType::Float),
    ("kappa", KeyType::Float),
    ("t_end", KeyType::Float),
    ("topology.kind", KeyType::Str),
    ("topology.direction", KeyType::Str),
    ("topology.periodic", KeyType::Bool),
    ("topology.rows", KeyType::Int),
    ("topology.cols", KeyType::Int),
    ("topology.probability", KeyType::Float),
    ("topology.directed", KeyType::Bool),
    ("topology.seed", KeyType::Int),
    ("topology.matrix", KeyType::Str),
    ("topology.path", KeyType::Str),
    ("potential.kind", KeyType::Str),
    ("potential.s", KeyType::Float),
    ("potential.sigma", KeyType::Float),
    ("potential.a", KeyType::Float),
    ("potential.b", KeyType::Float),
    ("potential.order", KeyType::Int),
    ("noise.coefficient", KeyType::Float),
    ("noise.seed", KeyType::Int),
    ("noise.refresh_interval", KeyType::Float),
    ("noise.base", KeyType::Str),
    ("delay.kind", KeyType::Str),
    ("delay.tau", KeyType::Float),
    ("delay.matrix", KeyType::Str),
    ("delay.mean", KeyType::Float),
    ("delay.jitter", KeyType::Float),
    ("delay.seed", KeyType::Int),
    ("delay.refresh_interval", KeyType::Float),
    ("initial.kind", KeyType::Str),
    ("initial.seed", KeyType::Int),
    ("initial.count", KeyType::Int),
    ("initial.value", KeyType::Float),
    ("integrator.rel_tol", KeyType::Float),
    ("integrator.abs_tol", KeyType::Float),
    ("integrator.initial_step", KeyType::Float),
    ("integrator.max_step", KeyType::Float),
    ("integrator.min_step", KeyType::Float),
    ("integrator.sample_interval", KeyType::Float),
    ("integrator.fixed_step", KeyType::Float),
    ("output.metrics", KeyType::List),
    ("output.heatmap_every", KeyType::Int),
    ("output.heatmap_wrap", KeyType::Bool),
    ("output.gradient_wrap", KeyType::Bool),
    ("output.histogram_bins", KeyType::Int),
    ("output.histogram_snapshots", KeyType::Int),
    ("output.rotating_frame", KeyType::Bool),
    ("analysis.resync_threshold", KeyType::Float),
    ("analysis.hold_fraction", KeyType::Float),
];

/// Seed keys set together by a global `--seed`.
pub const SEED_KEYS: [&str; 4] = ["noise.seed", "delay.seed", "initial.seed", "topology.seed"];

pub fn key_type(key: &str) -> Option<KeyType> {
    KEYS.iter().find(|(k, _)| *k == key).map(|&(_, t)| t)
}

/// Dotted-path view of a config document, before interpretation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatConfig {
    entries: BTreeMap<String, toml::Value>,
    /// Directory relative paths (`topology.path`) resolve against.
    base_dir: Option<std::path::PathBuf>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Parses a scalar written on the command line: TOML syntax first, bare
/// string otherwise.
fn parse_value(text: &str) -> toml::Value {
    let text = text.trim();
    match format!("v = {text}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("single key"),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.message().to_string()))?;
        let mut entries = BTreeMap::new();
        flatten("", &table, &mut entries);
        let flat = Self {
            entries,
            base_dir: None,
        };
        flat.check_keys()?;
        Ok(flat)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        let mut flat = Self::parse(&text)?;
        flat.base_dir = path.parent().map(Path::to_path_buf);
        Ok(flat)
    }

    fn check_keys(&self) -> Result<(), ConfigError> {
        for key in self.entries.keys() {
            if !key.starts_with("tool.") && key_type(key).is_none() {
                return Err(ConfigError::UnknownKey(key.clone()));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&toml::Value> {
        self.entries.get(key)
    }

    /// Sets one key, checking that it exists.
    pub fn set(&mut self, key: &str, value: toml::Value) -> Result<(), ConfigError> {
        if key_type(key).is_none() {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(assignment.to_string()))?;
        self.set(key.trim(), parse_value(value))
    }

    /// Sets every seed key to `seed`.
    pub fn apply_seed(&mut self, seed: u64) {
        for key in SEED_KEYS {
            self.entries
                .insert(key.to_string(), toml::Value::Integer(seed as i64));
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(ConfigError::WrongType {
                key: key.into(),
                expected: "a number",
            }),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(toml::Value::Float(x)) if x.fract() == 0.0 && x.abs() < 2f64.powi(53) => {
                Ok(Some(*x as i64))
            }
            Some(_) => Err(ConfigError::WrongType {
                key: key.into(),
                expected: "an integer",
            }),
        }
    }

    fn uint(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.int(key)? {
            Some(i) if i < 0 => Err(ConfigError::InvalidValue {
                key: key.into(),
                message: format!("{i} must not be negative"),
            }),
            other => Ok(other.map(|i| i as u64)),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(ConfigError::WrongType {
                key: key.into(),
                expected: "true or false",
            }),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(ConfigError::WrongType {
                key: key.into(),
                expected: "a string",
            }),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<String>>, ConfigError> {
        let wrong = || ConfigError::WrongType {
            key: key.into(),
            expected: "a list of strings",
        };
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(
                s.split(',')
                    .map(|x| x.trim().to_string())
                    .filter(|x| !x.is_empty())
                    .collect(),
            )),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(wrong))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(wrong()),
        }
    }

    fn choice<'a>(&'a self, key: &str, options: &[&str], default: &'a str) -> Result<&'a str, ConfigError> {
        let v = self.string(key)?.unwrap_or(default);
        if options.contains(&v) {
            Ok(v)
        } else {
            Err(ConfigError::InvalidValue {
                key: key.into(),
                message: format!("{v:?} is not one of {}", options.join(", ")),
            })
        }
    }

    /// Interprets the document as a [`SimulationConfig`]. The result still
    /// has to pass [`crate::model::validate`].
    pub fn build(&self) -> Result<SimulationConfig, ConfigError> {
        let d = SimulationConfig::default();
        let p = self.uint("oscillators")?.map_or(d.oscillators, |v| v as usize);

        let topology = {
            let kind = self.choice(
                "topology.kind",
                &["chain", "mesh", "random", "matrix", "file", "all-to-all", "none"],
                "chain",
            )?;
            let periodic = self.boolean("topology.periodic")?.unwrap_or(false);
            match kind {
                "chain" => {
                    let dir = match self.choice(
                        "topology.direction",
                        &["unidirectional", "bidirectional", "uni", "bi"],
                        "unidirectional",
                    )? {
                        "unidirectional" | "uni" => Direction::Unidirectional,
                        _ => Direction::Bidirectional,
                    };
                    topology::chain(p, dir, periodic)?
                }
                "mesh" => {
                    let rows = self.uint("topology.rows")?.unwrap_or(1) as usize;
                    let cols = self.uint("topology.cols")?.map_or(p / rows.max(1), |c| c as usize);
                    topology::mesh2d(rows, cols, periodic)?
                }
                "random" => topology::random_graph(
                    p,
                    self.float("topology.probability")?.unwrap_or(0.5),
                    self.boolean("topology.directed")?.unwrap_or(true),
                    self.uint("topology.seed")?.unwrap_or(0),
                )?,
                "matrix" => {
                    let text = self.string("topology.matrix")?.ok_or(ConfigError::InvalidValue {
                        key: "topology.matrix".into(),
                        message: "required when topology.kind = \"matrix\"".into(),
                    })?;
                    let mut t = topology::parse_inline(text)?;
                    t.set_periodic(periodic);
                    t
                }
                "file" => {
                    let path = self.string("topology.path")?.ok_or(ConfigError::InvalidValue {
                        key: "topology.path".into(),
                        message: "required when topology.kind = \"file\"".into(),
                    })?;
                    let path = match &self.base_dir {
                        Some(dir) if Path::new(path).is_relative() => dir.join(path),
                        _ => Path::new(path).to_path_buf(),
                    };
                    topology::load_csv(&path)?
                }
                "all-to-all" => topology::all_to_all(p)?,
                _ => crate::model::TopologyMatrix::empty(p),
            }
        };

        let potential = match self.choice(
            "potential.kind",
            &["sin", "tanh", "piecewise-sin", "fourier"],
            "tanh",
        )? {
            "sin" => PotentialSpec::Sin,
            "tanh" => PotentialSpec::Tanh {
                s: self.float("potential.s")?.unwrap_or(5.0),
            },
            "piecewise-sin" => PotentialSpec::PiecewiseSin {
                sigma: self.float("potential.sigma")?.unwrap_or(1.0),
            },
            _ => {
                let order = self.uint("potential.order")?.unwrap_or(p as u64);
                PotentialSpec::Fourier {
                    a: self.float("potential.a")?.unwrap_or(0.5),
                    b: self.float("potential.b")?.unwrap_or(0.25),
                    order: u32::try_from(order).map_err(|_| ConfigError::InvalidValue {
                        key: "potential.order".into(),
                        message: format!("{order} is too large"),
                    })?,
                }
            }
        };

        let noise = NoiseSpec {
            coefficient: self.float("noise.coefficient")?.unwrap_or(d.noise.coefficient),
            seed: self.uint("noise.seed")?.unwrap_or(d.noise.seed),
            refresh_interval: self
                .float("noise.refresh_interval")?
                .unwrap_or(d.noise.refresh_interval),
            base: match self.choice("noise.base", &["deterministic", "intrinsic"], "deterministic")? {
                "intrinsic" => NoiseBase::Intrinsic,
                _ => NoiseBase::Deterministic,
            },
        };

        let delay = match self.choice("delay.kind", &["none", "constant", "stochastic"], "none")? {
            "none" => DelaySpec::None,
            "constant" => match self.string("delay.matrix")? {
                Some(text) => DelaySpec::Constant {
                    tau: parse_float_matrix("delay.matrix", text)?,
                },
                None => DelaySpec::uniform(p, self.float("delay.tau")?.unwrap_or(0.0)),
            },
            _ => DelaySpec::Stochastic {
                mean: self.float("delay.mean")?.unwrap_or(0.0),
                jitter: self.float("delay.jitter")?.unwrap_or(0.0),
                seed: self.uint("delay.seed")?.unwrap_or(0),
                refresh_interval: self.float("delay.refresh_interval")?.unwrap_or(1.0),
            },
        };

        let initial = match self.choice(
            "initial.kind",
            &["uniform", "random", "linear", "perturbation"],
            "perturbation",
        )? {
            "uniform" => InitialCondition::Uniform,
            "random" => InitialCondition::Random {
                seed: self.uint("initial.seed")?.unwrap_or(0),
            },
            "linear" => InitialCondition::LinearlySpaced,
            _ => {
                let (dc, dv) = match d.initial {
                    InitialCondition::LocalizedPerturbation { count, value } => (count, value),
                    _ => unreachable!("default is a perturbation"),
                };
                InitialCondition::LocalizedPerturbation {
                    count: self.uint("initial.count")?.map_or(dc, |c| c as usize),
                    value: self.float("initial.value")?.unwrap_or(dv),
                }
            }
        };

        let di = IntegratorOptions::default();
        let integrator = IntegratorOptions {
            rel_tol: self.float("integrator.rel_tol")?.unwrap_or(di.rel_tol),
            abs_tol: self.float("integrator.abs_tol")?.unwrap_or(di.abs_tol),
            initial_step: self.float("integrator.initial_step")?.unwrap_or(di.initial_step),
            max_step: self.float("integrator.max_step")?.unwrap_or(di.max_step),
            min_step: self.float("integrator.min_step")?.unwrap_or(di.min_step),
            sample_interval: self
                .float("integrator.sample_interval")?
                .unwrap_or(di.sample_interval),
            fixed_step: self.float("integrator.fixed_step")?,
        };

        let dout = OutputSelection::default();
        let metrics = match self.list("output.metrics")? {
            None => dout.metrics.clone(),
            Some(names) => {
                let mut kinds = Vec::new();
                for n in names {
                    let k = MetricKind::from_name(&n).ok_or_else(|| ConfigError::InvalidValue {
                        key: "output.metrics".into(),
                        message: format!(
                            "unknown metric {n:?}; known: {}",
                            MetricKind::ALL.map(MetricKind::name).join(", ")
                        ),
                    })?;
                    if !kinds.contains(&k) {
                        kinds.push(k);
                    }
                }
                kinds.sort();
                kinds
            }
        };
        let usize_or = |key: &str, default: usize| -> Result<usize, ConfigError> {
            Ok(self.uint(key)?.map_or(default, |v| v as usize))
        };
        let output = OutputSelection {
            metrics,
            heatmap_every: usize_or("output.heatmap_every", dout.heatmap_every)?,
            heatmap_wrap: self.boolean("output.heatmap_wrap")?.unwrap_or(dout.heatmap_wrap),
            gradient_wrap: self.boolean("output.gradient_wrap")?.unwrap_or(dout.gradient_wrap),
            histogram_bins: usize_or("output.histogram_bins", dout.histogram_bins)?,
            histogram_snapshots: usize_or("output.histogram_snapshots", dout.histogram_snapshots)?,
            rotating_frame: self.boolean("output.rotating_frame")?.unwrap_or(dout.rotating_frame),
            resync_threshold: self
                .float("analysis.resync_threshold")?
                .unwrap_or(dout.resync_threshold),
            hold_fraction: self.float("analysis.hold_fraction")?.unwrap_or(dout.hold_fraction),
        };

        Ok(SimulationConfig {
            oscillators: p,
            t_comp: self.float("t_comp")?.unwrap_or(d.t_comp),
            t_comm: self.float("t_comm")?.unwrap_or(d.t_comm),
            beta: self.float("beta")?.unwrap_or(d.beta),
            kappa: self.float("kappa")?.unwrap_or(d.kappa),
            topology,
            potential,
            noise,
            delay,
            initial,
            t_end: self.float("t_end")?.unwrap_or(d.t_end),
            integrator,
            output,
        })
    }
}

fn parse_float_matrix(key: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(';')
        .flat_map(|row| row.split(','))
        .map(|cell| {
            cell.trim().parse::<f64>().map_err(|_| ConfigError::InvalidValue {
                key: key.into(),
                message: format!("{cell:?} is not a number"),
            })
        })
        .collect()
}

/// Parses config text straight to a [`SimulationConfig`].
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    FlatConfig::parse(text)?.build()
}

fn float_lit(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn str_lit(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Serializes every field; `parse_config(&to_toml(c)) == c` for any
/// config built by this module. Random and file topologies are written as
/// their explicit matrix.
pub fn to_toml(cfg: &SimulationConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("oscillators", cfg.oscillators.to_string());
    kv("t_comp", float_lit(cfg.t_comp));
    kv("t_comm", float_lit(cfg.t_comm));
    kv("beta", float_lit(cfg.beta));
    kv("kappa", float_lit(cfg.kappa));
    kv("t_end", float_lit(cfg.t_end));

    kv("topology.kind", str_lit("matrix"));
    kv("topology.periodic", cfg.topology.periodic().to_string());
    kv("topology.matrix", str_lit(&topology::to_inline(&cfg.topology)));

    match cfg.potential {
        PotentialSpec::Sin => kv("potential.kind", str_lit("sin")),
        PotentialSpec::Tanh { s } => {
            kv("potential.kind", str_lit("tanh"));
            kv("potential.s", float_lit(s));
        }
        PotentialSpec::PiecewiseSin { sigma } => {
            kv("potential.kind", str_lit("piecewise-sin"));
            kv("potential.sigma", float_lit(sigma));
        }
        PotentialSpec::Fourier { a, b, order } => {
            kv("potential.kind", str_lit("fourier"));
            kv("potential.a", float_lit(a));
            kv("potential.b", float_lit(b));
            kv("potential.order", order.to_string());
        }
    }

    kv("noise.coefficient", float_lit(cfg.noise.coefficient));
    kv("noise.seed", (cfg.noise.seed as i64).to_string());
    kv("noise.refresh_interval", float_lit(cfg.noise.refresh_interval));
    kv(
        "noise.base",
        str_lit(match cfg.noise.base {
            NoiseBase::Deterministic => "deterministic",
            NoiseBase::Intrinsic => "intrinsic",
        }),
    );

    match &cfg.delay {
        DelaySpec::None => kv("delay.kind", str_lit("none")),
        DelaySpec::Constant { tau } => {
            kv("delay.kind", str_lit("constant"));
            if tau.len() == cfg.oscillators * cfg.oscillators
                && tau.iter().all(|&x| x.to_bits() == tau[0].to_bits())
            {
                kv("delay.tau", float_lit(tau[0]));
            } else {
                let p = cfg.oscillators.max(1);
                let rows: Vec<String> = tau
                    .chunks(p)
                    .map(|r| r.iter().map(|&x| float_lit(x)).collect::<Vec<_>>().join(","))
                    .collect();
                kv("delay.matrix", str_lit(&rows.join(";")));
            }
        }
        DelaySpec::Stochastic {
            mean,
            jitter,
            seed,
            refresh_interval,
        } => {
            kv("delay.kind", str_lit("stochastic"));
            kv("delay.mean", float_lit(*mean));
            kv("delay.jitter", float_lit(*jitter));
            kv("delay.seed", (*seed as i64).to_string());
            kv("delay.refresh_interval", float_lit(*refresh_interval));
        }
    }

    match cfg.initial {
        InitialCondition::Uniform => kv("initial.kind", str_lit("uniform")),
        InitialCondition::Random { seed } => {
            kv("initial.kind", str_lit("random"));
            kv("initial.seed", (seed as i64).to_string());
        }
        InitialCondition::LinearlySpaced => kv("initial.kind", str_lit("linear")),
        InitialCondition::LocalizedPerturbation { count, value } => {
            kv("initial.kind", str_lit("perturbation"));
            kv("initial.count", count.to_string());
            kv("initial.value", float_lit(value));
        }
    }

    let i = &cfg.integrator;
    kv("integrator.rel_tol", float_lit(i.rel_tol));
    kv("integrator.abs_tol", float_lit(i.abs_tol));
    kv("integrator.initial_step", float_lit(i.initial_step));
    kv("integrator.max_step", float_lit(i.max_step));
    kv("integrator.min_step", float_lit(i.min_step));
    kv("integrator.sample_interval", float_lit(i.sample_interval));
    if let Some(h) = i.fixed_step {
        kv("integrator.fixed_step", float_lit(h));
    }

    let o = &cfg.output;
    let names: Vec<String> = o.metrics.iter().map(|m| str_lit(m.name())).collect();
    kv("output.metrics", format!("[{}]", names.join(", ")));
    kv("output.heatmap_every", o.heatmap_every.to_string());
    kv("output.heatmap_wrap", o.heatmap_wrap.to_string());
    kv("output.gradient_wrap", o.gradient_wrap.to_string());
    kv("output.histogram_bins", o.histogram_bins.to_string());
    kv("output.histogram_snapshots", o.histogram_snapshots.to_string());
    kv("output.rotating_frame", o.rotating_frame.to_string());
    kv("analysis.resync_threshold", float_lit(o.resync_threshold));
    kv("analysis.hold_fraction", float_lit(o.hold_fraction));
    s
}
