//! Domain types, run configuration and validation.

use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

use crate::integrator::IntegratorOptions;
use crate::rng::{self, Purpose};

/// Phases of all oscillators at model time `t`.
///
/// Phases are unwrapped: they grow without bound and are never reduced
/// modulo 2π during integration.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub theta: Vec<f64>,
}

impl PhaseState {
    pub fn new(t: f64, theta: Vec<f64>) -> Self {
        Self { t, theta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.theta.iter().all(|x| x.is_finite())
    }
}

/// Square 0/1 influence matrix: `get(i, j)` is true when oscillator `i`
/// is influenced by (receives messages from) oscillator `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyMatrix {
    size: usize,
    entries: Vec<bool>,
    periodic: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("topology needs at least 2 oscillators, got {0}")]
    TooSmall(usize),
    #[error("edge probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("topology matrix is not square: row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("topology entry ({row}, {col}) must be 0 or 1, got {value:?}")]
    NotBinary {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("topology has a self-coupling entry at ({0}, {0})")]
    SelfCoupling(usize),
    #[error("failed to read topology: {0}")]
    Io(String),
}

impl TopologyMatrix {
    /// Matrix with no edges.
    pub fn empty(size: usize) -> Self {
        Self {
            size,
            entries: vec![false; size * size],
            periodic: false,
        }
    }

    /// Builds a matrix from rows, enforcing squareness and a zero diagonal.
    pub fn from_rows(rows: &[Vec<u8>], periodic: bool) -> Result<Self, TopologyError> {
        let size = rows.len();
        let mut entries = vec![false; size * size];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(TopologyError::NotSquare {
                    row: i,
                    expected: size,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 if i == j => return Err(TopologyError::SelfCoupling(i)),
                    1 => entries[i * size + j] = true,
                    other => {
                        return Err(TopologyError::NotBinary {
                            row: i,
                            col: j,
                            value: other.to_string(),
                        })
                    }
                }
            }
        }
        Ok(Self {
            size,
            entries,
            periodic,
        })
    }

    pub(crate) fn set(&mut self, i: usize, j: usize) {
        debug_assert!(i != j);
        self.entries[i * self.size + j] = true;
    }

    pub(crate) fn set_periodic(&mut self, periodic: bool) {
        self.periodic = periodic;
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.size + j]
    }

    /// Oscillators that influence `i`, in ascending order.
    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.entries[i * self.size..(i + 1) * self.size];
        row.iter()
            .enumerate()
            .filter_map(|(j, &on)| on.then_some(j))
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Interaction potential `V(θ_j − θ_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// Classical Kuramoto coupling `sin(Δ)`.
    Sin,
    /// `tanh(s·Δ)`, attractive with saturation; `s > 0`.
    Tanh { s: f64 },
    /// Short-range repulsion `−sin(3πΔ/(2σ))` for `|Δ| < σ`, `sgn(Δ)` otherwise.
    PiecewiseSin { sigma: f64 },
    /// `sin(Δ) − a·sin(NΔ) + b·sin(2NΔ)`.
    Fourier { a: f64, b: f64, order: u32 },
}

/// Which velocity the multiplicative noise scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseBase {
    /// The noise-free velocity, intrinsic frequency plus coupling.
    #[default]
    Deterministic,
    /// The intrinsic frequency only.
    Intrinsic,
}

/// Local noise `ζ_i(t) = c · base_i(t) · r_i(t)` with `r_i` uniform on
/// `[0, 1)`, redrawn every `refresh_interval` and held in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub coefficient: f64,
    pub seed: u64,
    pub refresh_interval: f64,
    pub base: NoiseBase,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            coefficient: 0.0,
            seed: 0,
            refresh_interval: 100.0 * IntegratorOptions::default().min_step,
            base: NoiseBase::Deterministic,
        }
    }
}

impl NoiseSpec {
    pub fn is_active(&self) -> bool {
        self.coefficient != 0.0
    }
}

/// Communication delays `τ_ij(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DelaySpec {
    #[default]
    None,
    /// Row-major P×P matrix of fixed delays.
    Constant { tau: Vec<f64> },
    /// `mean + U(−jitter, jitter)` per edge, clamped at zero, redrawn every
    /// `refresh_interval`.
    Stochastic {
        mean: f64,
        jitter: f64,
        seed: u64,
        refresh_interval: f64,
    },
}

impl DelaySpec {
    /// Same delay on every edge of a `p`-oscillator system.
    pub fn uniform(p: usize, tau: f64) -> Self {
        DelaySpec::Constant {
            tau: vec![tau; p * p],
        }
    }
}

/// Initial phase configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    Uniform,
    Random { seed: u64 },
    LinearlySpaced,
    /// The first `count` oscillators start at `value`, the rest at zero.
    LocalizedPerturbation { count: usize, value: f64 },
}

/// Metric files and analysis settings attached to a run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSelection {
    pub metrics: Vec<MetricKind>,
    /// Write a heatmap block for every n-th sample.
    pub heatmap_every: usize,
    pub heatmap_wrap: bool,
    pub gradient_wrap: bool,
    pub histogram_bins: usize,
    pub histogram_snapshots: usize,
    /// Project the phase circle in the frame rotating at ω.
    pub rotating_frame: bool,
    pub resync_threshold: f64,
    /// Resynchronization hold window as a fraction of `t_end`.
    pub hold_fraction: f64,
}

impl Default for OutputSelection {
    fn default() -> Self {
        Self {
            metrics: MetricKind::ALL.to_vec(),
            heatmap_every: 10,
            heatmap_wrap: false,
            gradient_wrap: false,
            histogram_bins: 36,
            histogram_snapshots: 4,
            rotating_frame: false,
            resync_threshold: 0.99,
            hold_fraction: 0.1,
        }
    }
}

/// Metric outputs a run can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Trajectory,
    PhaseCircle,
    Order,
    Entropy,
    Gradient,
    Pairwise,
    Histogram,
    Heatmap,
    Potential,
}

impl MetricKind {
    pub const ALL: [MetricKind; 9] = [
        MetricKind::Trajectory,
        MetricKind::PhaseCircle,
        MetricKind::Order,
        MetricKind::Entropy,
        MetricKind::Gradient,
        MetricKind::Pairwise,
        MetricKind::Histogram,
        MetricKind::Heatmap,
        MetricKind::Potential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Trajectory => "trajectory",
            MetricKind::PhaseCircle => "phase_circle",
            MetricKind::Order => "order",
            MetricKind::Entropy => "entropy",
            MetricKind::Gradient => "gradient",
            MetricKind::Pairwise => "pairwise",
            MetricKind::Histogram => "histogram",
            MetricKind::Heatmap => "heatmap",
            MetricKind::Potential => "potential",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "R" | "r" => Some(MetricKind::Order),
            _ => Self::ALL.into_iter().find(|k| k.name() == name),
        }
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub oscillators: usize,
    pub t_comp: f64,
    pub t_comm: f64,
    /// Protocol factor: 1 for eager, 2 for rendezvous messages.
    pub beta: f64,
    /// Communication-distance factor.
    pub kappa: f64,
    pub topology: TopologyMatrix,
    pub potential: PotentialSpec,
    pub noise: NoiseSpec,
    pub delay: DelaySpec,
    pub initial: InitialCondition,
    pub t_end: f64,
    pub integrator: IntegratorOptions,
    pub output: OutputSelection,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let p = 18;
        Self {
            oscillators: p,
            t_comp: 0.9,
            t_comm: 0.1,
            beta: 1.0,
            kappa: 1.0,
            topology: crate::topology::chain(p, crate::topology::Direction::Unidirectional, false)
                .expect("default chain"),
            potential: PotentialSpec::Tanh { s: 5.0 },
            noise: NoiseSpec::default(),
            delay: DelaySpec::None,
            initial: InitialCondition::LocalizedPerturbation {
                count: 1,
                value: 1.5 * PI,
            },
            t_end: 250.0,
            integrator: IntegratorOptions::default(),
            output: OutputSelection::default(),
        }
    }
}

impl SimulationConfig {
    /// Intrinsic frequency `2π / (t_comp + t_comm)`.
    pub fn omega(&self) -> f64 {
        TAU / (self.t_comp + self.t_comm)
    }

    /// Coupling strength `β·κ / (t_comp + t_comm)`.
    pub fn coupling_strength(&self) -> f64 {
        self.beta * self.kappa / (self.t_comp + self.t_comm)
    }
}

/// One violated invariant. Field names use the config key paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("dimension mismatch in {field}: expected {expected}, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{field} must be positive, got {value}")]
    NonPositiveDuration { field: &'static str, value: f64 },
    #[error("invalid potential parameter {field} = {value}: {reason}")]
    InvalidPotentialParam {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("negative delay in {field}: {value}")]
    DelayNegative { field: &'static str, value: f64 },
    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),
    #[error("invalid {field} = {value}: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: String,
        reason: String,
    },
}

/// Every invariant a configuration violates.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// A configuration that passed [`validate`], with its derived rates fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    config: SimulationConfig,
    omega: f64,
    coupling_strength: f64,
}

impl ValidatedConfig {
    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn into_inner(self) -> SimulationConfig {
        self.config
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `v_p`, fixed at validation time.
    pub fn coupling_strength(&self) -> f64 {
        self.coupling_strength
    }
}

impl std::ops::Deref for ValidatedConfig {
    type Target = SimulationConfig;

    fn deref(&self) -> &SimulationConfig {
        &self.config
    }
}

fn positive(out: &mut Vec<Violation>, field: &'static str, value: f64) {
    if !(value > 0.0 && value.is_finite()) {
        out.push(Violation::NonPositiveDuration { field, value });
    }
}

fn invalid(out: &mut Vec<Violation>, field: &'static str, value: impl ToString, reason: &str) {
    out.push(Violation::InvalidParameter {
        field,
        value: value.to_string(),
        reason: reason.to_string(),
    });
}

/// Checks every invariant of `config`; on success the config is returned
/// unchanged together with `ω` and `v_p`.
pub fn validate(config: SimulationConfig) -> Result<ValidatedConfig, ValidationReport> {
    let mut v = Vec::new();
    let p = config.oscillators;
    if p < 1 {
        invalid(&mut v, "oscillators", p, "need at least one oscillator");
    }
    if config.topology.size() != p {
        v.push(Violation::DimensionMismatch {
            field: "topology",
            expected: p,
            found: config.topology.size(),
        });
    }
    if !(config.t_comp >= 0.0 && config.t_comp.is_finite()) {
        invalid(&mut v, "t_comp", config.t_comp, "must be >= 0");
    }
    if !(config.t_comm >= 0.0 && config.t_comm.is_finite()) {
        invalid(&mut v, "t_comm", config.t_comm, "must be >= 0");
    }
    if !(config.t_comp + config.t_comm > 0.0) {
        v.push(Violation::NonPositiveDuration {
            field: "t_comp + t_comm",
            value: config.t_comp + config.t_comm,
        });
    }
    if config.beta != 1.0 && config.beta != 2.0 {
        invalid(&mut v, "beta", config.beta, "must be 1 (eager) or 2 (rendezvous)");
    }
    if !(config.kappa > 0.0 && config.kappa.is_finite()) {
        invalid(&mut v, "kappa", config.kappa, "must be > 0");
    }
    positive(&mut v, "t_end", config.t_end);

    match config.potential {
        PotentialSpec::Sin => {}
        PotentialSpec::Tanh { s } => {
            if !(s > 0.0 && s.is_finite()) {
                v.push(Violation::InvalidPotentialParam {
                    field: "potential.s",
                    value: s,
                    reason: "steepness must be > 0",
                });
            }
        }
        PotentialSpec::PiecewiseSin { sigma } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                v.push(Violation::InvalidPotentialParam {
                    field: "potential.sigma",
                    value: sigma,
                    reason: "repulsion width must be > 0",
                });
            }
        }
        PotentialSpec::Fourier { a, b, order } => {
            if order < 1 {
                v.push(Violation::InvalidPotentialParam {
                    field: "potential.order",
                    value: order as f64,
                    reason: "harmonic order must be >= 1",
                });
            }
            if !a.is_finite() {
                v.push(Violation::InvalidPotentialParam {
                    field: "potential.a",
                    value: a,
                    reason: "must be finite",
                });
            }
            if !b.is_finite() {
                v.push(Violation::InvalidPotentialParam {
                    field: "potential.b",
                    value: b,
                    reason: "must be finite",
                });
            }
        }
    }

    let noise = &config.noise;
    if !(noise.coefficient >= 0.0 && noise.coefficient.is_finite()) {
        invalid(&mut v, "noise.coefficient", noise.coefficient, "must be >= 0");
    }
    positive(&mut v, "noise.refresh_interval", noise.refresh_interval);

    match &config.delay {
        DelaySpec::None => {}
        DelaySpec::Constant { tau } => {
            if tau.len() != p * p {
                v.push(Violation::DimensionMismatch {
                    field: "delay.matrix",
                    expected: p * p,
                    found: tau.len(),
                });
            }
            if let Some(&bad) = tau.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                v.push(Violation::DelayNegative {
                    field: "delay.tau",
                    value: bad,
                });
            }
        }
        DelaySpec::Stochastic {
            mean,
            jitter,
            refresh_interval,
            ..
        } => {
            if !(*mean >= 0.0 && mean.is_finite()) {
                v.push(Violation::DelayNegative {
                    field: "delay.mean",
                    value: *mean,
                });
            }
            if !(*jitter >= 0.0 && jitter.is_finite()) {
                v.push(Violation::DelayNegative {
                    field: "delay.jitter",
                    value: *jitter,
                });
            }
            positive(&mut v, "delay.refresh_interval", *refresh_interval);
        }
    }

    if let InitialCondition::LocalizedPerturbation { count, value } = config.initial {
        if count < 1 || count > p {
            v.push(Violation::InvalidInitialCondition(format!(
                "initial.count = {count} must lie in 1..={p}"
            )));
        }
        if !value.is_finite() {
            v.push(Violation::InvalidInitialCondition(format!(
                "initial.value = {value} must be finite"
            )));
        }
    }

    let opts = &config.integrator;
    if !(opts.rel_tol > 0.0) {
        invalid(&mut v, "integrator.rel_tol", opts.rel_tol, "must be > 0");
    }
    if !(opts.abs_tol > 0.0) {
        invalid(&mut v, "integrator.abs_tol", opts.abs_tol, "must be > 0");
    }
    positive(&mut v, "integrator.min_step", opts.min_step);
    positive(&mut v, "integrator.sample_interval", opts.sample_interval);
    if !(opts.min_step <= opts.initial_step && opts.initial_step <= opts.max_step) {
        invalid(
            &mut v,
            "integrator.initial_step",
            opts.initial_step,
            "need min_step <= initial_step <= max_step",
        );
    }
    if let Some(h) = opts.fixed_step {
        positive(&mut v, "integrator.fixed_step", h);
    }

    let out = &config.output;
    if out.heatmap_every < 1 {
        invalid(&mut v, "output.heatmap_every", out.heatmap_every, "must be >= 1");
    }
    if out.histogram_bins < 1 {
        invalid(&mut v, "output.histogram_bins", out.histogram_bins, "must be >= 1");
    }
    if !(0.0..=1.0).contains(&out.resync_threshold) {
        invalid(
            &mut v,
            "analysis.resync_threshold",
            out.resync_threshold,
            "must lie in [0, 1]",
        );
    }
    if !(0.0..=1.0).contains(&out.hold_fraction) {
        invalid(
            &mut v,
            "analysis.hold_fraction",
            out.hold_fraction,
            "must lie in [0, 1]",
        );
    }

    if !v.is_empty() {
        return Err(ValidationReport { violations: v });
    }
    let omega = config.omega();
    let coupling_strength = config.coupling_strength();
    Ok(ValidatedConfig {
        config,
        omega,
        coupling_strength,
    })
}

/// Initial phase vector of length `n`.
pub fn materialize_initial(ic: &InitialCondition, n: usize) -> Result<Vec<f64>, Violation> {
    if n < 1 {
        return Err(Violation::InvalidInitialCondition(
            "need at least one oscillator".into(),
        ));
    }
    Ok(match *ic {
        InitialCondition::Uniform => vec![0.0; n],
        InitialCondition::Random { seed } => {
            let mut theta = vec![0.0; n];
            rng::fill_uniform(seed, Purpose::InitialPhases, 0, &mut theta);
            theta.iter_mut().for_each(|x| *x *= TAU);
            theta
        }
        InitialCondition::LinearlySpaced => {
            (0..n).map(|i| TAU * i as f64 / n as f64).collect()
        }
        InitialCondition::LocalizedPerturbation { count, value } => {
            if count > n {
                return Err(Violation::InvalidInitialCondition(format!(
                    "perturbation count {count} exceeds oscillator count {n}"
                )));
            }
            let mut theta = vec![0.0; n];
            theta[..count].iter_mut().for_each(|x| *x = value);
            theta
        }
    })
}
