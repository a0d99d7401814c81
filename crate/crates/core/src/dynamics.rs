//! Right-hand side of the phase equation
//!
//! ```text
//! θ̇_i = ω + ζ_i(t) + (v_p / P) · Σ_j T_ij · V(θ_j(t − τ_ij) − θ_i(t))
//! ```
//!
//! together with the history buffer that serves the delayed lookups and the
//! piecewise-constant noise and delay streams.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::{DelaySpec, NoiseBase, NoiseSpec, PotentialSpec, ValidatedConfig};
use crate::potentials;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("history lookup at t = {t} precedes buffer coverage starting at {earliest}")]
    HistoryUnderflow { t: f64, earliest: f64 },
}

/// One accepted step's continuous extension: `5 × P` coefficients laid out
/// coefficient-major (`cont[k * P + j]`).
#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    h: f64,
    cont: Vec<f64>,
}

impl Segment {
    fn eval(&self, p: usize, t: f64, j: usize) -> f64 {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = |k: usize| self.cont[k * p + j];
        c(0) + s * (c(1) + s1 * (c(2) + s * (c(3) + s1 * c(4))))
    }

    fn end(&self) -> f64 {
        self.t0 + self.h
    }
}

/// Dense-output records covering at least `[t − τ_max, t]`.
///
/// Lookups before `t = 0` return the initial phases (constant prehistory).
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    p: usize,
    initial: Vec<f64>,
    horizon: f64,
    segments: VecDeque<Segment>,
}

impl HistoryBuffer {
    /// `horizon` is the largest delay that will ever be looked up.
    pub fn new(initial: Vec<f64>, horizon: f64) -> Self {
        Self {
            p: initial.len(),
            initial,
            horizon,
            segments: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Appends the continuous extension of the step `[t0, t0 + h]` and drops
    /// records older than the horizon.
    pub fn push(&mut self, t0: f64, h: f64, cont: Vec<f64>) {
        debug_assert_eq!(cont.len(), 5 * self.p);
        debug_assert!(self.segments.back().is_none_or(|s| s.t0 < t0));
        self.segments.push_back(Segment { t0, h, cont });
        let keep_from = t0 + h - self.horizon;
        while self.segments.len() > 1 && self.segments[0].end() < keep_from {
            self.segments.pop_front();
        }
    }

    /// Phase of oscillator `j` at time `t`.
    ///
    /// Times past the newest record extrapolate its polynomial; this only
    /// happens for delays shorter than the integrator's step floor.
    pub fn query(&self, t: f64, j: usize) -> Result<f64, DynamicsError> {
        if t <= 0.0 {
            return Ok(self.initial[j]);
        }
        let Some(first) = self.segments.front() else {
            return Ok(self.initial[j]);
        };
        if t < first.t0 {
            return Err(DynamicsError::HistoryUnderflow {
                t,
                earliest: first.t0,
            });
        }
        let k = self.segments.partition_point(|s| s.t0 <= t) - 1;
        Ok(self.segments[k].eval(self.p, t, j))
    }
}

/// Uniform draws `r_i ∈ [0, 1)` for refresh interval `k`.
pub fn noise_factors(spec: &NoiseSpec, interval: u64, out: &mut [f64]) {
    rng::fill_uniform(spec.seed, Purpose::Noise, interval, out);
}

/// `ζ_i = c · base_i · r_i(t)` with `r` held constant on each refresh interval.
pub fn noise_sample(spec: &NoiseSpec, t: f64, base: &[f64]) -> Vec<f64> {
    if !spec.is_active() {
        return vec![0.0; base.len()];
    }
    let interval = (t / spec.refresh_interval).floor().max(0.0) as u64;
    let mut r = vec![0.0; base.len()];
    noise_factors(spec, interval, &mut r);
    r.iter()
        .zip(base)
        .map(|(r, b)| spec.coefficient * b * r)
        .collect()
}

/// Realized delays of every (i, j) pair for refresh interval `interval`,
/// row-major. Stochastic delays are `mean + U(−jitter, jitter)` clamped at 0.
pub fn realize_delays(delay: &DelaySpec, p: usize, interval: u64, out: &mut [f64]) {
    match delay {
        DelaySpec::None => out.fill(0.0),
        DelaySpec::Constant { tau } => out.copy_from_slice(&tau[..p * p]),
        DelaySpec::Stochastic {
            mean, jitter, seed, ..
        } => {
            rng::fill_uniform(*seed, Purpose::Delay, interval, out);
            for x in out.iter_mut() {
                *x = (mean + jitter * (2.0 * *x - 1.0)).max(0.0);
            }
        }
    }
}

/// `τ_ij` at time `t`.
pub fn resolve_delay(delay: &DelaySpec, p: usize, i: usize, j: usize, t: f64) -> f64 {
    match delay {
        DelaySpec::None => 0.0,
        DelaySpec::Constant { tau } => tau[i * p + j],
        DelaySpec::Stochastic {
            refresh_interval, ..
        } => {
            let interval = (t / refresh_interval).floor().max(0.0) as u64;
            let mut all = vec![0.0; p * p];
            realize_delays(delay, p, interval, &mut all);
            all[i * p + j]
        }
    }
}

/// The assembled phase system. Noise and delays are held at the values of
/// the current refresh interval, set by the integrator before each step.
#[derive(Debug, Clone)]
pub struct PhaseSystem {
    p: usize,
    omega: f64,
    prefactor: f64,
    potential: PotentialSpec,
    in_edges: Vec<Vec<usize>>,
    noise: NoiseSpec,
    r: Vec<f64>,
    delay: DelaySpec,
    tau: Vec<f64>,
}

impl PhaseSystem {
    pub fn new(cfg: &ValidatedConfig) -> Self {
        let p = cfg.oscillators;
        let in_edges = (0..p).map(|i| cfg.topology.in_neighbors(i).collect()).collect();
        let mut sys = Self {
            p,
            omega: cfg.omega(),
            prefactor: cfg.coupling_strength() / p as f64,
            potential: cfg.potential,
            in_edges,
            noise: cfg.noise,
            r: vec![0.0; p],
            delay: cfg.delay.clone(),
            tau: vec![0.0; p * p],
        };
        sys.set_noise_interval(0);
        sys.set_delay_interval(0);
        sys
    }

    pub fn len(&self) -> usize {
        self.p
    }

    pub fn is_empty(&self) -> bool {
        self.p == 0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn delay(&self) -> &DelaySpec {
        &self.delay
    }

    pub fn set_noise_interval(&mut self, k: u64) {
        if self.noise.is_active() {
            noise_factors(&self.noise, k, &mut self.r);
        }
    }

    pub fn set_delay_interval(&mut self, k: u64) {
        realize_delays(&self.delay, self.p, k, &mut self.tau);
    }

    fn active_delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.in_edges
            .iter()
            .enumerate()
            .flat_map(move |(i, js)| js.iter().map(move |&j| self.tau[i * self.p + j]))
    }

    /// Smallest positive delay on an active edge in the current interval.
    pub fn min_positive_delay(&self) -> Option<f64> {
        self.active_delays()
            .filter(|&t| t > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Upper bound on every delay the run can realize.
    pub fn delay_horizon(&self) -> f64 {
        match &self.delay {
            DelaySpec::None => 0.0,
            DelaySpec::Constant { .. } => self.active_delays().fold(0.0, f64::max),
            DelaySpec::Stochastic { mean, jitter, .. } => mean + jitter,
        }
    }

    /// Distinct positive delays on active edges (constant delays only).
    pub fn constant_delays(&self) -> Vec<f64> {
        if !matches!(self.delay, DelaySpec::Constant { .. }) {
            return Vec::new();
        }
        let mut d: Vec<f64> = self.active_delays().filter(|&t| t > 0.0).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    }

    /// Phase velocities at `(t, theta)`, written into `out`.
    pub fn rhs(
        &self,
        t: f64,
        theta: &[f64],
        history: &HistoryBuffer,
        out: &mut [f64],
    ) -> Result<(), DynamicsError> {
        let noisy = self.noise.is_active();
        for i in 0..self.p {
            let mut coupling = 0.0;
            for &j in &self.in_edges[i] {
                let tau = self.tau[i * self.p + j];
                let theta_j = if tau > 0.0 {
                    history.query(t - tau, j)?
                } else {
                    theta[j]
                };
                coupling += potentials::eval(&self.potential, theta_j - theta[i]);
            }
            let v = self.omega + self.prefactor * coupling;
            out[i] = if noisy {
                let base = match self.noise.base {
                    NoiseBase::Deterministic => v,
                    NoiseBase::Intrinsic => self.omega,
                };
                v + self.noise.coefficient * base * self.r[i]
            } else {
                v
            };
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, SimulationConfig, TopologyMatrix};
    use crate::topology::{all_to_all, chain, Direction};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn config(p: usize, topology: TopologyMatrix, potential: PotentialSpec) -> SimulationConfig {
        SimulationConfig {
            oscillators: p,
            t_comp: 0.5,
            t_comm: 0.5,
            topology,
            potential,
            ..SimulationConfig::default()
        }
    }

    fn eval(sys: &PhaseSystem, theta: &[f64]) -> Vec<f64> {
        let hist = HistoryBuffer::new(theta.to_vec(), 0.0);
        let mut out = vec![0.0; theta.len()];
        sys.rhs(0.0, theta, &hist, &mut out).unwrap();
        out
    }

    #[test]
    fn single_oscillator_runs_at_omega() {
        let cfg = config(1, TopologyMatrix::empty(1), PotentialSpec::Sin);
        let cfg = SimulationConfig {
            initial: crate::model::InitialCondition::Uniform,
            ..cfg
        };
        let sys = PhaseSystem::new(&validate(cfg).unwrap());
        assert_eq!(eval(&sys, &[0.3]), vec![TAU]);
    }

    #[test]
    fn two_node_tanh_example() {
        let cfg = config(
            2,
            chain(2, Direction::Unidirectional, false).unwrap(),
            PotentialSpec::Tanh { s: 1.0 },
        );
        let sys = PhaseSystem::new(&validate(cfg).unwrap());
        let out = eval(&sys, &[0.0, FRAC_PI_2]);
        assert_eq!(out[0], TAU);
        // quoted as ≈ 2π − 0.4589; the exact value is 2π − 0.45858…
        assert!((out[1] - (TAU - 0.4589)).abs() < 5e-4);
        assert!((out[1] - (TAU + 0.5 * (-FRAC_PI_2).tanh())).abs() < 1e-15);
    }

    #[test]
    fn equal_phases_give_omega() {
        for pot in [
            PotentialSpec::Sin,
            PotentialSpec::Tanh { s: 4.0 },
            PotentialSpec::PiecewiseSin { sigma: 1.0 },
            PotentialSpec::Fourier { a: 0.5, b: 0.25, order: 6 },
        ] {
            let cfg = config(6, all_to_all(6).unwrap(), pot);
            let sys = PhaseSystem::new(&validate(cfg).unwrap());
            assert!(eval(&sys, &[2.5; 6]).iter().all(|&v| v == TAU));
        }
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let spec = NoiseSpec {
            coefficient: 5.0,
            seed: 11,
            refresh_interval: 0.1,
            base: NoiseBase::Intrinsic,
        };
        let base = vec![TAU; 8];
        let a = noise_sample(&spec, 0.37, &base);
        assert_eq!(a, noise_sample(&spec, 0.31, &base));
        assert_ne!(a, noise_sample(&spec, 0.41, &base));
        assert!(a.iter().all(|&z| (0.0..5.0 * TAU).contains(&z)));
        let off = NoiseSpec {
            coefficient: 0.0,
            ..spec
        };
        assert_eq!(noise_sample(&off, 3.0, &base), vec![0.0; 8]);
    }

    #[test]
    fn delay_resolution() {
        assert_eq!(resolve_delay(&DelaySpec::None, 3, 1, 0, 2.0), 0.0);
        let c = DelaySpec::uniform(3, 0.25);
        assert_eq!(resolve_delay(&c, 3, 1, 0, 2.0), 0.25);
        let s = DelaySpec::Stochastic {
            mean: 0.2,
            jitter: 0.3,
            seed: 5,
            refresh_interval: 0.5,
        };
        let mut all = vec![0.0; 100];
        let mut clamped = 0;
        for k in 0..20 {
            realize_delays(&s, 10, k, &mut all);
            assert!(all.iter().all(|&t| (0.0..=0.5).contains(&t)));
            clamped += all.iter().filter(|&&t| t == 0.0).count();
        }
        assert!(clamped > 0, "some draws should hit the clamp");
        assert_eq!(resolve_delay(&s, 10, 2, 3, 1.2), resolve_delay(&s, 10, 2, 3, 1.4));
    }

    #[test]
    fn history_prehistory_and_interpolation() {
        let mut h = HistoryBuffer::new(vec![1.0, 2.0], 0.5);
        assert_eq!(h.query(-3.0, 1).unwrap(), 2.0);
        // linear segment y = y0 + (y1 - y0)·s has cont = (y0, y1 - y0, -(y1-y0)+h·k1, ...)
        // with k1 = slope the cubic terms vanish
        let y0 = [1.0, 2.0];
        let slope = [2.0, -1.0];
        let seg = |t0: f64, y: [f64; 2]| {
            let hstep = 0.25;
            let mut c = vec![0.0; 10];
            for j in 0..2 {
                let diff = slope[j] * hstep;
                c[j] = y[j] + slope[j] * t0;
                c[2 + j] = diff;
                c[4 + j] = hstep * slope[j] - diff;
                c[6 + j] = diff - hstep * slope[j] - c[4 + j];
            }
            c
        };
        for k in 0..8 {
            let t0 = k as f64 * 0.25;
            h.push(t0, 0.25, seg(t0, y0));
        }
        assert!(h.len() < 8);
        let v = h.query(1.9, 0).unwrap();
        assert!((v - (1.0 + 2.0 * 1.9)).abs() < 1e-12);
        assert!(matches!(
            h.query(0.1, 0),
            Err(DynamicsError::HistoryUnderflow { .. })
        ));
    }

    fn kuramoto(theta: &[f64], omega: f64, k: f64) -> Vec<f64> {
        let n = theta.len() as f64;
        theta
            .iter()
            .map(|ti| omega + k / n * theta.iter().map(|tj| (tj - ti).sin()).sum::<f64>())
            .collect()
    }

    proptest! {
        #[test]
        fn shift_invariant(shift in -50.0f64..50.0, seed: u64) {
            let p = 7;
            let cfg = config(p, chain(p, Direction::Bidirectional, true).unwrap(), PotentialSpec::Tanh { s: 3.0 });
            let sys = PhaseSystem::new(&validate(cfg).unwrap());
            let mut theta = vec![0.0; p];
            rng::fill_uniform(seed, Purpose::InitialPhases, 0, &mut theta);
            let shifted: Vec<f64> = theta.iter().map(|x| x + shift).collect();
            let a = eval(&sys, &theta);
            let b = eval(&sys, &shifted);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn masked_entries_contribute_nothing(other in -10.0f64..10.0) {
            let cfg = config(3, chain(3, Direction::Unidirectional, false).unwrap(), PotentialSpec::Sin);
            let sys = PhaseSystem::new(&validate(cfg).unwrap());
            // oscillator 1 hears only 0; perturbing 2 must not change its velocity
            let a = eval(&sys, &[0.4, 1.0, 2.0]);
            let b = eval(&sys, &[0.4, 1.0, other]);
            prop_assert_eq!(a[0], b[0]);
            prop_assert_eq!(a[1], b[1]);
        }

        #[test]
        fn classical_limit(seed: u64, kappa in 0.1f64..5.0) {
            let p = 9;
            let cfg = SimulationConfig { kappa, ..config(p, all_to_all(p).unwrap(), PotentialSpec::Sin) };
            let v = validate(cfg).unwrap();
            let sys = PhaseSystem::new(&v);
            let mut theta = vec![0.0; p];
            rng::fill_uniform(seed, Purpose::InitialPhases, 3, &mut theta);
            theta.iter_mut().for_each(|x| *x *= TAU);
            let ours = eval(&sys, &theta);
            let reference = kuramoto(&theta, v.omega(), v.coupling_strength());
            for (a, b) in ours.iter().zip(&reference) {
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }
    }
}
