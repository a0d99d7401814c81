//! One simulation run: integrate, evaluate the selected metrics and write
//! the run directory.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::to_toml;
use crate::exec::Execution;
use crate::integrator::{integrate, IntegrationError, StepStats, Trajectory};
use crate::metrics::{self, fmt_num, MetricSeries, Resync};
use crate::model::{MetricKind, SimulationConfig, ValidatedConfig};
use crate::trace::{Interpolation, TraceError, TraceTimeline};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("integration failed: {0}")]
    Integration(#[from] IntegrationError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Io { context, source }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub resync: Resync,
    pub final_r: f64,
    pub final_entropy: f64,
    /// Largest `|θ_j − θ_i|` over all pairs at `t_end`.
    pub final_spread: f64,
    pub stats: StepStats,
    pub samples: usize,
}

impl RunSummary {
    fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            (
                "resync_time",
                self.resync
                    .time()
                    .map_or_else(|| "NotReached".to_string(), fmt_num),
            ),
            ("final_R", fmt_num(self.final_r)),
            ("final_entropy", fmt_num(self.final_entropy)),
            ("final_spread", fmt_num(self.final_spread)),
            ("samples", self.samples.to_string()),
            ("accepted_steps", self.stats.accepted.to_string()),
            ("rejected_steps", self.stats.rejected.to_string()),
            ("rhs_evals", self.stats.rhs_evals.to_string()),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    /// Order parameter at every sample; always computed for the summary.
    pub order: Vec<f64>,
    pub series: Vec<MetricSeries>,
    pub histograms: Vec<(f64, metrics::Histogram)>,
    pub summary: RunSummary,
}

impl RunOutcome {
    pub fn series(&self, name: &str) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.name == name)
    }
}

/// Sample indices for `m` evenly spread histogram snapshots.
fn snapshot_indices(n: usize, m: usize) -> Vec<usize> {
    if n == 0 || m == 0 {
        return Vec::new();
    }
    if m == 1 || n == 1 {
        return vec![n - 1];
    }
    let mut idx: Vec<usize> = (0..m)
        .map(|j| ((j * (n - 1)) as f64 / (m - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

/// Evaluates the configured metrics over a trajectory.
pub fn analyze(cfg: &ValidatedConfig, traj: &Trajectory, exec: Execution) -> RunOutcome {
    let times = &traj.times;
    let states = &traj.states;
    let p = cfg.oscillators;
    let out = &cfg.output;
    let want = |k: MetricKind| out.metrics.contains(&k);
    let order = exec.map(states, |th| metrics::order_parameter(th).r);
    let mut series = Vec::new();

    for kind in &out.metrics {
        match kind {
            MetricKind::Trajectory => series.push(MetricSeries {
                name: "trajectory".into(),
                times: times.clone(),
                values: metrics::SeriesValues::Vector {
                    columns: (0..p).map(|i| format!("theta_{i}")).collect(),
                    rows: states.clone(),
                },
            }),
            MetricKind::PhaseCircle => {
                let omega = if out.rotating_frame { cfg.omega() } else { 0.0 };
                let columns = (0..p)
                    .flat_map(|i| [format!("x_{i}"), format!("y_{i}")])
                    .collect();
                series.push(metrics::vector_series("phase_circle", columns, times, states, exec, |t, th| {
                    metrics::phase_circle(th, omega * t)
                        .into_iter()
                        .flat_map(|(x, y)| [x, y])
                        .collect()
                }));
            }
            MetricKind::Order => series.push(MetricSeries::scalar("R", times.clone(), order.clone())),
            MetricKind::Entropy => series.push(metrics::scalar_series("entropy", times, states, exec, |_, th| {
                metrics::sync_entropy(th).value
            })),
            MetricKind::Gradient => {
                let wrap = out.gradient_wrap;
                let topo = &cfg.topology;
                series.push(metrics::vector_series(
                    "gradient",
                    (0..p).map(|i| format!("g_{i}")).collect(),
                    times,
                    states,
                    exec,
                    |_, th| {
                        let g = if wrap {
                            metrics::phase_gradient_wrapped(th, topo)
                        } else {
                            metrics::phase_gradient(th, topo)
                        };
                        g.expect("validated dimensions")
                    },
                ));
            }
            MetricKind::Pairwise => series.push(metrics::vector_series(
                "pairwise",
                metrics::pairwise_labels(p),
                times,
                states,
                exec,
                |_, th| metrics::pairwise_differences(th),
            )),
            MetricKind::Heatmap => series.push(metrics::heatmap_series(
                times,
                states,
                out.heatmap_every,
                out.heatmap_wrap,
                exec,
            )),
            MetricKind::Potential => {
                let (topo, pot) = (&cfg.topology, &cfg.potential);
                series.push(metrics::scalar_series("potential", times, states, exec, |_, th| {
                    metrics::potential_energy(th, topo, pot).expect("validated dimensions")
                }));
            }
            MetricKind::Histogram => {}
        }
    }

    let histograms = if want(MetricKind::Histogram) {
        snapshot_indices(times.len(), out.histogram_snapshots)
            .into_iter()
            .map(|k| (times[k], metrics::pairwise_histogram(&states[k], out.histogram_bins)))
            .collect()
    } else {
        Vec::new()
    };

    let last = states.last().expect("non-empty trajectory");
    let window = out.hold_fraction * cfg.t_end;
    let summary = RunSummary {
        resync: metrics::resync_time(times, &order, out.resync_threshold, window),
        final_r: *order.last().expect("non-empty trajectory"),
        final_entropy: metrics::sync_entropy(last).value,
        final_spread: {
            let (lo, hi) = last
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            hi - lo
        },
        stats: traj.stats,
        samples: times.len(),
    };

    RunOutcome {
        trajectory: traj.clone(),
        order,
        series,
        histograms,
        summary,
    }
}

/// Integrates and analyzes a validated configuration.
pub fn simulate(cfg: &ValidatedConfig, exec: Execution) -> Result<RunOutcome, RunError> {
    let traj = integrate(cfg)?;
    Ok(analyze(cfg, &traj, exec))
}

/// Evaluates the configured metrics on trace-derived phases sampled on the
/// midpoint grid (a single-instant trace yields one sample).
pub fn analyze_trace(
    cfg: &ValidatedConfig,
    timeline: &TraceTimeline,
    mode: Interpolation,
    exec: Execution,
) -> Result<RunOutcome, TraceError> {
    let mut grid = timeline.midpoint_grid();
    if grid.is_empty() {
        grid.push(timeline.span().0);
    }
    let states = timeline.sample(&grid, mode)?;
    let traj = Trajectory {
        times: grid,
        states,
        stats: StepStats::default(),
    };
    Ok(analyze(cfg, &traj, exec))
}

/// File name a series is written under.
pub fn file_name(series: &MetricSeries) -> PathBuf {
    match series.values {
        metrics::SeriesValues::Matrix { .. } => PathBuf::from(&series.name),
        _ => PathBuf::from(format!("{}.csv", series.name)),
    }
}

/// Manifest text: the resolved config plus tool metadata. Feeding it back
/// as a config reproduces the run exactly.
pub fn manifest(cfg: &SimulationConfig) -> String {
    format!(
        "{}tool.name = \"oscsim\"\ntool.version = \"{}\"\n",
        to_toml(cfg),
        crate::VERSION
    )
}

/// Writes metric files, `summary.csv` and `manifest.toml` into `dir`.
pub fn write_outputs(outcome: &RunOutcome, cfg: &SimulationConfig, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    for s in &outcome.series {
        let path = dir.join(file_name(s));
        s.write_csv(&path).map_err(io_err(format!("writing {}", path.display())))?;
    }
    if !outcome.histograms.is_empty() {
        let path = dir.join("histogram.csv");
        write_histograms(&outcome.histograms, &path).map_err(io_err(format!("writing {}", path.display())))?;
    }
    let path = dir.join("summary.csv");
    write_summary(&outcome.summary, &path).map_err(io_err(format!("writing {}", path.display())))?;
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest(cfg)).map_err(io_err(format!("writing {}", path.display())))?;
    Ok(())
}

fn write_histograms(hist: &[(f64, metrics::Histogram)], path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "bin_lo", "bin_hi", "count"])?;
    for (t, h) in hist {
        for (k, c) in h.counts.iter().enumerate() {
            w.write_record([fmt_num(*t), fmt_num(h.edges[k]), fmt_num(h.edges[k + 1]), c.to_string()])?;
        }
    }
    w.flush()
}

fn write_summary(summary: &RunSummary, path: &Path) -> io::Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "key,value")?;
    for (k, v) in summary.rows() {
        writeln!(f, "{k},{v}")?;
    }
    f.flush()
}

/// [`simulate`] followed by [`write_outputs`].
pub fn simulate_to_dir(cfg: &ValidatedConfig, dir: &Path, exec: Execution) -> Result<RunOutcome, RunError> {
    let outcome = simulate(cfg, exec)?;
    write_outputs(&outcome, cfg.config(), dir)?;
    Ok(outcome)
}
