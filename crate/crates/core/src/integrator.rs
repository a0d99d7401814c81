//! Adaptive Dormand–Prince 5(4) integration with dense output, used as a
//! method-of-steps DDE solver.
//!
//! Every accepted step stores its 4th-order continuous extension in the
//! [`HistoryBuffer`], from which delayed lookups are served. Steps never
//! exceed the smallest active delay and never cross a noise or delay refresh
//! time, so within a step the system is a smooth constant-delay DDE.

use thiserror::Error;

use crate::dynamics::{DynamicsError, HistoryBuffer, PhaseSystem};
use crate::model::{materialize_initial, DelaySpec, PhaseState, ValidatedConfig, Violation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Floor for error-controlled step shrinking.
    pub min_step: f64,
    /// Spacing of recorded output samples; has no effect on the dynamics.
    pub sample_interval: f64,
    /// Disable error control and take steps of this size (barriers and the
    /// delay cap still apply).
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            initial_step: 1e-3,
            max_step: 0.1,
            min_step: 1e-5,
            sample_interval: 0.1,
            fixed_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t}: error control requested h = {h:e} below min_step")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite phase of oscillator {index} at t = {t}")]
    NonFiniteState { t: f64, index: usize },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Initial(#[from] Violation),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// Output samples of one run. The first sample is the initial state at
/// `t = 0`, the last is the state at `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn oscillators(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> PhaseState {
        PhaseState::new(
            *self.times.last().expect("non-empty trajectory"),
            self.states.last().expect("non-empty trajectory").clone(),
        )
    }

    pub fn sample(&self, k: usize) -> PhaseState {
        PhaseState::new(self.times[k], self.states[k].clone())
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order minus embedded 4th-order weights; the 5th-order weights are A[6].
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Continuous extension (Hairer–Nørsett–Wanner, dense output of DOPRI5).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Integrates a validated configuration from `t = 0` to `t_end`.
pub fn integrate(cfg: &ValidatedConfig) -> Result<Trajectory, IntegrationError> {
    let theta0 = materialize_initial(&cfg.initial, cfg.oscillators)?;
    let mut sys = PhaseSystem::new(cfg);
    integrate_system(&mut sys, theta0, cfg.t_end, &cfg.integrator)
}

/// Refresh times of one periodic stream, tracked by integer interval index
/// so barrier times never accumulate rounding drift.
#[derive(Debug, Clone, Copy)]
struct Refresh {
    interval: f64,
    k: u64,
}

impl Refresh {
    fn next(&self) -> f64 {
        (self.k + 1) as f64 * self.interval
    }
}

struct Workspace {
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    y_new: Vec<f64>,
}

impl Workspace {
    fn new(p: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; p]),
            stage: vec![0.0; p],
            y_new: vec![0.0; p],
        }
    }
}

/// Computes stages 2..7 from `k[0]`, leaving the 5th-order solution in
/// `y_new` and `k[6] = f(t + h, y_new)`.
fn dp_step(
    sys: &PhaseSystem,
    hist: &HistoryBuffer,
    t: f64,
    y: &[f64],
    h: f64,
    ws: &mut Workspace,
) -> Result<(), DynamicsError> {
    let p = y.len();
    for s in 1..7 {
        for i in 0..p {
            let mut acc = 0.0;
            for (r, a) in A[s][..s].iter().enumerate() {
                acc += a * ws.k[r][i];
            }
            ws.stage[i] = y[i] + h * acc;
        }
        sys.rhs(t + C[s] * h, &ws.stage, hist, &mut ws.k[s])?;
    }
    // Stage 7 is evaluated at the 5th-order solution (FSAL).
    ws.y_new.copy_from_slice(&ws.stage);
    Ok(())
}

fn error_norm(y: &[f64], ws: &Workspace, h: f64, opts: &IntegratorOptions) -> f64 {
    let p = y.len();
    let mut sum = 0.0;
    for i in 0..p {
        let mut e = 0.0;
        for s in 0..7 {
            e += E[s] * ws.k[s][i];
        }
        let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(ws.y_new[i].abs());
        let r = h * e / sc;
        sum += r * r;
    }
    (sum / p as f64).sqrt()
}

fn dense_coefficients(y: &[f64], ws: &Workspace, h: f64) -> Vec<f64> {
    let p = y.len();
    let mut cont = vec![0.0; 5 * p];
    for i in 0..p {
        let ydiff = ws.y_new[i] - y[i];
        let bspl = h * ws.k[0][i] - ydiff;
        let mut d = 0.0;
        for s in 0..7 {
            d += D[s] * ws.k[s][i];
        }
        cont[i] = y[i];
        cont[p + i] = ydiff;
        cont[2 * p + i] = bspl;
        cont[3 * p + i] = ydiff - h * ws.k[6][i] - bspl;
        cont[4 * p + i] = h * d;
    }
    cont
}

fn interpolate(cont: &[f64], p: usize, s: f64, out: &mut Vec<f64>) {
    let s1 = 1.0 - s;
    out.clear();
    out.extend((0..p).map(|i| {
        let c = |k: usize| cont[k * p + i];
        c(0) + s * (c(1) + s1 * (c(2) + s * (c(3) + s1 * c(4))))
    }));
}

/// Derivative discontinuities propagated from `t = 0` by constant delays:
/// `m·τ` for `m = 1..=5` and every distinct delay, ascending.
fn discontinuities(delays: &[f64], t_end: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = delays
        .iter()
        .flat_map(|&tau| (1..=5).map(move |m| m as f64 * tau))
        .filter(|&t| t < t_end)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Core driver; `sys` carries the noise and delay streams.
pub fn integrate_system(
    sys: &mut PhaseSystem,
    theta0: Vec<f64>,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory, IntegrationError> {
    let p = theta0.len();
    let mut hist = HistoryBuffer::new(theta0.clone(), sys.delay_horizon());
    let mut stats = StepStats::default();
    let mut ws = Workspace::new(p);

    let mut noise = sys.noise().is_active().then(|| Refresh {
        interval: sys.noise().refresh_interval,
        k: 0,
    });
    let mut delay = match sys.delay() {
        DelaySpec::Stochastic {
            refresh_interval, ..
        } => Some(Refresh {
            interval: *refresh_interval,
            k: 0,
        }),
        _ => None,
    };
    let kinks = discontinuities(&sys.constant_delays(), t_end);
    let mut next_kink = 0;

    let si = opts.sample_interval;
    let mut next_sample: u64 = 1;
    let sample_time = |n: u64| n as f64 * si;
    let sample_eps = 1e-9 * si;

    let mut times = vec![0.0];
    let mut states = vec![theta0.clone()];

    let mut t = 0.0;
    let mut y = theta0;
    let mut h = opts.fixed_step.unwrap_or(opts.initial_step);
    let mut fresh_k1 = false;
    let mut last_rejected = false;
    let mut interp = Vec::with_capacity(p);

    while t < t_end {
        if !fresh_k1 {
            sys.rhs(t, &y, &hist, &mut ws.k[0])?;
            stats.rhs_evals += 1;
            fresh_k1 = true;
        }

        let mut barrier = t_end;
        for r in [noise, delay].into_iter().flatten() {
            barrier = barrier.min(r.next());
        }
        if let Some(&kink) = kinks.get(next_kink) {
            barrier = barrier.min(kink);
        }

        let mut cap = opts.max_step;
        if let Some(tau) = sys.min_positive_delay() {
            if tau >= opts.min_step {
                cap = cap.min(tau);
            }
        }
        let mut h_try = h.min(cap);
        let remaining = barrier - t;
        let hit = h_try >= remaining * (1.0 - 1e-12) || remaining - h_try < 1e-3 * h_try;
        if hit {
            h_try = remaining;
        }

        dp_step(sys, &hist, t, &y, h_try, &mut ws)?;
        stats.rhs_evals += 6;

        let err = if opts.fixed_step.is_some() {
            0.0
        } else {
            error_norm(&y, &ws, h_try, opts)
        };

        if err <= 1.0 {
            if let Some(index) = ws.y_new.iter().position(|v| !v.is_finite()) {
                return Err(IntegrationError::NonFiniteState { t: t + h_try, index });
            }
            stats.accepted += 1;
            let cont = dense_coefficients(&y, &ws, h_try);
            let t_new = if hit { barrier } else { t + h_try };

            while sample_time(next_sample) < t_end - sample_eps
                && sample_time(next_sample) <= t_new
            {
                let ts = sample_time(next_sample);
                if ts == t_new {
                    states.push(ws.y_new.clone());
                } else {
                    interpolate(&cont, p, (ts - t) / h_try, &mut interp);
                    states.push(interp.clone());
                }
                times.push(ts);
                next_sample += 1;
            }

            hist.push(t, h_try, cont);
            t = t_new;
            std::mem::swap(&mut y, &mut ws.y_new);
            ws.k.swap(0, 6);

            if hit {
                let refreshed_noise = advance(&mut noise, t, |k| sys.set_noise_interval(k));
                let refreshed_delay = advance(&mut delay, t, |k| sys.set_delay_interval(k));
                if refreshed_noise || refreshed_delay {
                    fresh_k1 = false;
                }
                while kinks.get(next_kink).is_some_and(|&k| k <= t) {
                    next_kink += 1;
                }
            }

            if opts.fixed_step.is_none() {
                let mut fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                if last_rejected {
                    fac = fac.min(1.0);
                }
                // Barrier-shortened steps say nothing about the natural step.
                let base = if hit { h.max(h_try) } else { h_try };
                h = (base * fac).min(opts.max_step);
            }
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h = h_try * fac;
            if h < opts.min_step {
                return Err(IntegrationError::StepUnderflow { t, h });
            }
            last_rejected = true;
        }
    }

    times.push(t_end);
    states.push(y);
    Ok(Trajectory {
        times,
        states,
        stats,
    })
}

/// Moves a refresh stream past `t`; calls `load` with the new interval
/// index and returns true if the interval changed.
fn advance(refresh: &mut Option<Refresh>, t: f64, mut load: impl FnMut(u64)) -> bool {
    let Some(r) = refresh else { return false };
    let before = r.k;
    while r.next() <= t {
        r.k += 1;
    }
    if r.k != before {
        load(r.k);
    }
    r.k != before
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        validate, InitialCondition, NoiseSpec, PotentialSpec, SimulationConfig, TopologyMatrix,
    };
    use crate::topology::{all_to_all, chain, Direction};
    use std::f64::consts::TAU;

    fn uncoupled(p: usize, t_end: f64) -> SimulationConfig {
        SimulationConfig {
            oscillators: p,
            t_comp: 0.5,
            t_comm: 0.5,
            topology: TopologyMatrix::empty(p),
            initial: InitialCondition::Random { seed: 3 },
            t_end,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn uncoupled_is_linear() {
        let cfg = validate(uncoupled(3, 2.0)).unwrap();
        let traj = integrate(&cfg).unwrap();
        let theta0 = &traj.states[0];
        assert_eq!(*traj.times.last().unwrap(), 2.0);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            for (x, x0) in s.iter().zip(theta0) {
                assert!((x - x0 - TAU * t).abs() < 1e-8);
            }
        }
        let fin = traj.final_state();
        for (x, x0) in fin.theta.iter().zip(theta0) {
            assert!((x - x0 - 4.0 * std::f64::consts::PI).abs() < 1e-6);
        }
    }

    #[test]
    fn samples_are_strictly_increasing_and_bracketed() {
        let cfg = validate(SimulationConfig {
            t_end: 3.05,
            ..uncoupled(2, 0.0)
        })
        .unwrap();
        let traj = integrate(&cfg).unwrap();
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(*traj.times.last().unwrap(), 3.05);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(traj.len(), 32);
    }

    fn rk4(theta: &[f64], omega: f64, k: f64, dt: f64, t_end: f64) -> Vec<f64> {
        let f = |th: &[f64]| -> Vec<f64> {
            let n = th.len() as f64;
            th.iter()
                .map(|a| omega + k / n * th.iter().map(|b| (b - a).sin()).sum::<f64>())
                .collect()
        };
        let mut y = theta.to_vec();
        let steps = (t_end / dt).round() as usize;
        for _ in 0..steps {
            let k1 = f(&y);
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect();
            let k2 = f(&y2);
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect();
            let k3 = f(&y3);
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + dt * b).collect();
            let k4 = f(&y4);
            for i in 0..y.len() {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }

    #[test]
    fn matches_rk4_reference_on_kuramoto_pair() {
        let cfg = validate(SimulationConfig {
            oscillators: 2,
            t_comp: 0.5,
            t_comm: 0.5,
            kappa: 2.0,
            topology: all_to_all(2).unwrap(),
            potential: PotentialSpec::Sin,
            initial: InitialCondition::LocalizedPerturbation { count: 1, value: 2.5 },
            t_end: 10.0,
            ..SimulationConfig::default()
        })
        .unwrap();
        let traj = integrate(&cfg).unwrap();
        let reference = rk4(&traj.states[0], cfg.omega(), cfg.coupling_strength(), 1e-4, 10.0);
        for (a, b) in traj.final_state().theta.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    fn delayed_pair(sample_interval: f64) -> ValidatedConfig {
        validate(SimulationConfig {
            oscillators: 2,
            t_comp: 0.5,
            t_comm: 0.5,
            topology: chain(2, Direction::Unidirectional, false).unwrap(),
            potential: PotentialSpec::Tanh { s: 2.0 },
            delay: DelaySpec::uniform(2, 0.5),
            initial: InitialCondition::LocalizedPerturbation { count: 1, value: 1.0 },
            t_end: 12.0,
            integrator: IntegratorOptions {
                sample_interval,
                ..IntegratorOptions::default()
            },
            ..SimulationConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn sampling_does_not_affect_dynamics() {
        let fine = integrate(&delayed_pair(0.01)).unwrap();
        let coarse = integrate(&delayed_pair(0.1)).unwrap();
        assert_eq!(fine.stats, coarse.stats);
        for (k, t) in coarse.times.iter().enumerate() {
            let j = fine.times.iter().position(|x| (x - t).abs() < 1e-9).unwrap();
            for (a, b) in coarse.states[k].iter().zip(&fine.states[j]) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_delay_equals_no_delay() {
        let base = delayed_pair(0.1).into_inner();
        let none = SimulationConfig {
            delay: DelaySpec::None,
            ..base.clone()
        };
        let zero = SimulationConfig {
            delay: DelaySpec::uniform(2, 0.0),
            ..base
        };
        let a = integrate(&validate(none).unwrap()).unwrap();
        let b = integrate(&validate(zero).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn delay_changes_the_trajectory() {
        let delayed = integrate(&delayed_pair(0.1)).unwrap();
        let instant = integrate(
            &validate(SimulationConfig {
                delay: DelaySpec::None,
                ..delayed_pair(0.1).into_inner()
            })
            .unwrap(),
        )
        .unwrap();
        assert!(delayed.final_state().is_finite());
        let (a, b) = (&delayed.states[20], &instant.states[20]);
        assert!((a[1] - b[1]).abs() > 1e-3);
        // no dependence on the future: the leader is unaffected
        assert!((a[0] - b[0]).abs() < 1e-9);
    }

    #[test]
    fn noisy_run_is_deterministic() {
        let cfg = validate(SimulationConfig {
            noise: NoiseSpec {
                coefficient: 0.1,
                seed: 4,
                refresh_interval: 0.01,
                ..NoiseSpec::default()
            },
            t_end: 5.0,
            ..SimulationConfig::default()
        })
        .unwrap();
        let a = integrate(&cfg).unwrap();
        let b = integrate(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.stats.accepted >= 500);
    }

    #[test]
    fn stochastic_delay_run_completes() {
        let cfg = validate(SimulationConfig {
            delay: DelaySpec::Stochastic {
                mean: 0.1,
                jitter: 0.05,
                seed: 9,
                refresh_interval: 0.5,
            },
            t_end: 10.0,
            ..SimulationConfig::default()
        })
        .unwrap();
        let a = integrate(&cfg).unwrap();
        assert_eq!(a, integrate(&cfg).unwrap());
        assert!(a.final_state().is_finite());
    }

    #[test]
    fn step_underflow_is_reported() {
        let cfg = validate(SimulationConfig {
            potential: PotentialSpec::Tanh { s: 1e6 },
            kappa: 1e4,
            integrator: IntegratorOptions {
                min_step: 1e-3,
                initial_step: 1e-3,
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                ..IntegratorOptions::default()
            },
            t_end: 5.0,
            ..SimulationConfig::default()
        })
        .unwrap();
        assert!(matches!(
            integrate(&cfg),
            Err(IntegrationError::StepUnderflow { .. })
        ));
    }
}
