//! Per-rank iteration timelines extracted from MPI traces, their conversion
//! to phases (2π per completed iteration), and metric-level comparison with
//! simulated runs.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::metrics::{fmt_num, MetricSeries, SeriesValues};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("rank {rank}: iteration count decreases from {from} to {to} at time {time}")]
    Monotonicity {
        rank: usize,
        time: f64,
        from: u64,
        to: u64,
    },
    #[error("rank {0} has no events (ranks must cover 0..P-1)")]
    MissingRank(usize),
    #[error("trace contains no events")]
    Empty,
    #[error("time {t} outside the trace span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("cannot compare {sim} series with {trace} series for metric {metric}")]
    IncompatibleMetricKinds {
        metric: String,
        sim: String,
        trace: String,
    },
    #[error("metric {metric} missing from the {side} series set")]
    MissingMetric { metric: String, side: &'static str },
    #[error("failed to read trace: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Last completed iteration (right-continuous, piecewise constant).
    Step,
    /// Linear between iteration events.
    Linear,
}

/// `(time, completed iterations)` events per rank, time-ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTimeline {
    ranks: Vec<Vec<(f64, u64)>>,
    start: f64,
    end: f64,
}

impl TraceTimeline {
    /// Groups raw `(rank, time, iteration)` events, sorts them per rank and
    /// checks the invariants.
    pub fn from_events(events: &[(usize, f64, u64)]) -> Result<Self, TraceError> {
        let Some(p) = events.iter().map(|e| e.0).max().map(|m| m + 1) else {
            return Err(TraceError::Empty);
        };
        let mut ranks = vec![Vec::new(); p];
        for &(r, t, n) in events {
            ranks[r].push((t, n));
        }
        for (rank, ev) in ranks.iter_mut().enumerate() {
            if ev.is_empty() {
                return Err(TraceError::MissingRank(rank));
            }
            ev.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in ev.windows(2) {
                if w[1].1 < w[0].1 {
                    return Err(TraceError::Monotonicity {
                        rank,
                        time: w[1].0,
                        from: w[0].1,
                        to: w[1].1,
                    });
                }
            }
        }
        let start = ranks.iter().map(|e| e[0].0).fold(f64::INFINITY, f64::min);
        let end = ranks
            .iter()
            .map(|e| e[e.len() - 1].0)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { ranks, start, end })
    }

    pub fn ranks(&self) -> usize {
        self.ranks.len()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn events(&self, rank: usize) -> &[(f64, u64)] {
        &self.ranks[rank]
    }

    fn iteration(&self, rank: usize, t: f64, mode: Interpolation) -> f64 {
        let ev = &self.ranks[rank];
        let k = ev.partition_point(|e| e.0 <= t);
        if k == 0 {
            return 0.0;
        }
        let (ta, na) = ev[k - 1];
        match mode {
            Interpolation::Step => na as f64,
            Interpolation::Linear => match ev.get(k) {
                Some(&(tb, nb)) if tb > ta => {
                    na as f64 + (t - ta) / (tb - ta) * (nb as f64 - na as f64)
                }
                _ => na as f64,
            },
        }
    }

    /// `θ_rank(t) = 2π · iteration(t)`. Ranks with no completed iteration
    /// at `t` report phase 0.
    pub fn to_phases(&self, t: f64, mode: Interpolation) -> Result<Vec<f64>, TraceError> {
        if !(t >= self.start && t <= self.end) {
            return Err(TraceError::OutOfRange {
                t,
                start: self.start,
                end: self.end,
            });
        }
        Ok((0..self.ranks())
            .map(|r| TAU * self.iteration(r, t, mode))
            .collect())
    }

    /// Midpoints between consecutive distinct event times. Step-mode phases
    /// are unambiguous there.
    pub fn midpoint_grid(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self.ranks.iter().flatten().map(|e| e.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `n` evenly spaced times over the span, endpoints included.
    pub fn uniform_grid(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![self.start],
            _ => (0..n)
                .map(|k| self.start + (self.end - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    /// Phase vectors on `grid`.
    pub fn sample(&self, grid: &[f64], mode: Interpolation) -> Result<Vec<Vec<f64>>, TraceError> {
        grid.iter().map(|&t| self.to_phases(t, mode)).collect()
    }
}

/// Parses CSV text with header `rank,time,iteration`. Rows may come in any
/// order.
pub fn parse_trace(text: &str) -> Result<TraceTimeline, TraceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| TraceError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let expected = ["rank", "time", "iteration"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(TraceError::Parse {
            line: 1,
            message: format!("expected header `rank,time,iteration`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut events = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| TraceError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |field: &str, value: &str| TraceError::Parse {
            line,
            message: format!("invalid {field} {value:?}"),
        };
        let rank = rec[0].parse::<usize>().map_err(|_| bad("rank", &rec[0]))?;
        let time = rec[1]
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .ok_or_else(|| bad("time", &rec[1]))?;
        let iteration = rec[2].parse::<u64>().map_err(|_| bad("iteration", &rec[2]))?;
        events.push((rank, time, iteration));
    }
    TraceTimeline::from_events(&events)
}

pub fn load_trace(path: &Path) -> Result<TraceTimeline, TraceError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TraceError::Io(format!("{}: {e}", path.display())))?;
    parse_trace(&text)
}

/// How model time and trace time are put on one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeAlignment {
    /// Both series mapped onto `[0, 1]`.
    Normalized,
    /// Trace time multiplied by this factor gives model time.
    Scale(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub metric: String,
    pub grid: Vec<f64>,
    pub sim: Vec<f64>,
    pub trace: Vec<f64>,
    /// `trace − sim` at every grid point.
    pub deltas: Vec<f64>,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub correlation: f64,
    /// Shift of the trace relative to the simulation (grid units of time)
    /// that maximizes their correlation; positive when the trace lags.
    pub lag: f64,
    pub lag_correlation: f64,
}

/// Per-sample scalar view of a series; vector and matrix samples are
/// reduced to their component mean.
fn reduce(series: &MetricSeries) -> (Vec<f64>, usize) {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    match &series.values {
        SeriesValues::Scalar(v) => (v.clone(), 1),
        SeriesValues::Vector { columns, rows } => {
            (rows.iter().map(|r| mean(r)).collect(), columns.len())
        }
        SeriesValues::Matrix { size, blocks } => {
            (blocks.iter().map(|b| mean(b)).collect(), size * size)
        }
    }
}

fn interp_at(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x <= t);
    if k == 0 {
        return values[0];
    }
    if k == times.len() {
        return values[k - 1];
    }
    let (ta, tb) = (times[k - 1], times[k]);
    values[k - 1] + (t - ta) / (tb - ta) * (values[k] - values[k - 1])
}

fn normalize(times: &[f64]) -> Vec<f64> {
    let (a, b) = (times[0], times[times.len() - 1]);
    if b > a {
        times.iter().map(|t| (t - a) / (b - a)).collect()
    } else {
        vec![0.0; times.len()]
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        // constant series: perfectly related only if identical
        return if a == b { 1.0 } else { 0.0 };
    }
    sab / (saa * sbb).sqrt()
}

fn find_series<'a>(
    set: &'a [MetricSeries],
    metric: &str,
    side: &'static str,
) -> Result<&'a MetricSeries, TraceError> {
    set.iter()
        .find(|s| s.name == metric)
        .ok_or(TraceError::MissingMetric {
            metric: metric.to_string(),
            side,
        })
}

/// Compares one metric present in both series sets.
pub fn compare(
    sim: &[MetricSeries],
    trace: &[MetricSeries],
    metric: &str,
    alignment: TimeAlignment,
) -> Result<ComparisonReport, TraceError> {
    let s = find_series(sim, metric, "simulation")?;
    let t = find_series(trace, metric, "trace")?;
    let (sv, sw) = reduce(s);
    let (tv, tw) = reduce(t);
    if s.kind() != t.kind() || sw != tw || sv.is_empty() || tv.is_empty() {
        return Err(TraceError::IncompatibleMetricKinds {
            metric: metric.to_string(),
            sim: format!("{} (width {sw})", s.kind()),
            trace: format!("{} (width {tw})", t.kind()),
        });
    }

    let (st, tt) = match alignment {
        TimeAlignment::Normalized => (normalize(&s.times), normalize(&t.times)),
        TimeAlignment::Scale(f) => (s.times.clone(), t.times.iter().map(|x| x * f).collect()),
    };
    let lo = st[0].max(tt[0]);
    let hi = st[st.len() - 1].min(tt[tt.len() - 1]);
    let n = s.len().max(t.len()).max(2);
    let grid: Vec<f64> = if hi > lo {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    } else {
        vec![lo]
    };
    let a: Vec<f64> = grid.iter().map(|&x| interp_at(&st, &sv, x)).collect();
    let b: Vec<f64> = grid.iter().map(|&x| interp_at(&tt, &tv, x)).collect();
    let deltas: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
    let max_abs = deltas.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mean_abs = deltas.iter().map(|d| d.abs()).sum::<f64>() / deltas.len() as f64;
    let correlation = pearson(&a, &b);

    // Pearson correlation over the overlap for shifts up to half the grid.
    let m = grid.len();
    let dt = if m > 1 { grid[1] - grid[0] } else { 0.0 };
    let (mut best_lag, mut best_corr) = (0i64, correlation);
    for k in 1..=(m / 2) as i64 {
        for lag in [k, -k] {
            let (xa, xb) = if lag > 0 {
                (&a[..m - lag as usize], &b[lag as usize..])
            } else {
                (&a[(-lag) as usize..], &b[..m - (-lag) as usize])
            };
            let c = pearson(xa, xb);
            if c > best_corr + 1e-12 {
                best_corr = c;
                best_lag = lag;
            }
        }
    }

    Ok(ComparisonReport {
        metric: metric.to_string(),
        grid,
        sim: a,
        trace: b,
        deltas,
        max_abs,
        mean_abs,
        correlation,
        lag: best_lag as f64 * dt,
        lag_correlation: best_corr,
    })
}

impl ComparisonReport {
    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "sim", "trace", "delta"])?;
        for k in 0..self.grid.len() {
            w.write_record([
                fmt_num(self.grid[k]),
                fmt_num(self.sim[k]),
                fmt_num(self.trace[k]),
                fmt_num(self.deltas[k]),
            ])?;
        }
        w.flush()
    }

    /// `key = value` summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "metric = {:?}", self.metric);
        let _ = writeln!(s, "points = {}", self.grid.len());
        let _ = writeln!(s, "max_abs_delta = {:?}", self.max_abs);
        let _ = writeln!(s, "mean_abs_delta = {:?}", self.mean_abs);
        let _ = writeln!(s, "correlation = {:?}", self.correlation);
        let _ = writeln!(s, "lag = {:?}", self.lag);
        let _ = writeln!(s, "lag_correlation = {:?}", self.lag_correlation);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lockstep(p: usize, n: u64) -> String {
        let mut s = String::from("rank,time,iteration\n");
        for it in 0..=n {
            for r in 0..p {
                s.push_str(&format!("{r},{}.0,{it}\n", it));
            }
        }
        s
    }

    #[test]
    fn lockstep_two_ranks() {
        let tl = parse_trace(&lockstep(2, 2)).unwrap();
        assert_eq!(tl.ranks(), 2);
        assert_eq!(tl.span(), (0.0, 2.0));
        assert_eq!(tl.to_phases(1.5, Interpolation::Step).unwrap(), vec![TAU, TAU]);
    }

    #[test]
    fn parse_errors() {
        let err = parse_trace("rank,time,iteration\n0,0.0,0\na,b,c\n").unwrap_err();
        assert_eq!(
            err,
            TraceError::Parse {
                line: 3,
                message: "invalid rank \"a\"".into()
            }
        );
        assert!(matches!(
            parse_trace("rank,time,iteration\n0,0.0,2\n0,1.0,1\n"),
            Err(TraceError::Monotonicity { rank: 0, .. })
        ));
        assert_eq!(
            parse_trace("rank,time,iteration\n0,0.0,0\n2,0.0,0\n"),
            Err(TraceError::MissingRank(1))
        );
        assert!(matches!(
            parse_trace("rank,time,iteration\n0,0.0\n"),
            Err(TraceError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_trace("a,b\n"), Err(TraceError::Parse { line: 1, .. })));
    }

    #[test]
    fn rows_in_any_order() {
        let tl = parse_trace("rank,time,iteration\n1,2.0,2\n0,1.0,1\n1,0.0,0\n0,2.0,2\n0,0.0,0\n1,1.0,1\n")
            .unwrap();
        assert_eq!(tl, parse_trace(&lockstep(2, 2)).unwrap());
    }

    #[test]
    fn phase_conventions() {
        let tl = TraceTimeline::from_events(&[
            (0, 0.0, 0),
            (0, 1.0, 5),
            (1, 0.0, 0),
            (1, 1.0, 3),
            (2, 0.5, 1),
            (2, 2.0, 2),
        ])
        .unwrap();
        let th = tl.to_phases(1.2, Interpolation::Step).unwrap();
        assert_eq!(th[0] - th[1], 2.0 * TAU);
        // rank 2 has not completed anything before t = 0.5
        assert_eq!(tl.to_phases(0.2, Interpolation::Step).unwrap()[2], 0.0);
        let lin = tl.to_phases(1.25, Interpolation::Linear).unwrap();
        assert!((lin[2] - 3.0 * PI).abs() < 1e-12);
        // right-continuous: the value at an event time is the new count
        assert_eq!(tl.to_phases(1.0, Interpolation::Step).unwrap()[0], 5.0 * TAU);
        assert!(matches!(
            tl.to_phases(2.5, Interpolation::Step),
            Err(TraceError::OutOfRange { .. })
        ));
    }

    #[test]
    fn grids() {
        let tl = parse_trace(&lockstep(3, 3)).unwrap();
        assert_eq!(tl.midpoint_grid(), vec![0.5, 1.5, 2.5]);
        assert_eq!(tl.uniform_grid(4), vec![0.0, 1.0, 2.0, 3.0]);
    }

    fn series(name: &str, times: Vec<f64>, f: impl Fn(f64) -> f64) -> MetricSeries {
        let v = times.iter().map(|&t| f(t)).collect();
        MetricSeries::scalar(name, times, v)
    }

    #[test]
    fn compare_examples() {
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.2).collect();
        let a = vec![series("R", times.clone(), |t| (t / 3.0).tanh())];
        let same = compare(&a, &a, "R", TimeAlignment::Normalized).unwrap();
        assert!(same.deltas.iter().all(|&d| d == 0.0));
        assert_eq!(same.correlation, 1.0);
        assert_eq!(same.lag, 0.0);

        let one = vec![series("R", times.clone(), |_| 1.0)];
        let zero = vec![series("R", times.clone(), |_| 0.0)];
        let c = compare(&one, &zero, "R", TimeAlignment::Normalized).unwrap();
        assert_eq!(c.mean_abs, 1.0);
        let c = compare(&one, &one, "R", TimeAlignment::Normalized).unwrap();
        assert_eq!(c.correlation, 1.0);

        let sigmoid = |t: f64| 1.0 / (1.0 + (-(t - 4.0)).exp());
        let sim = vec![series("R", times.clone(), sigmoid)];
        let lagged = vec![series("R", times.clone(), |t| sigmoid(t - 1.0))];
        let c = compare(&sim, &lagged, "R", TimeAlignment::Normalized).unwrap();
        assert!(c.correlation > 0.8);
        // 1.0 model time of a 10-long run = 0.1 normalized
        assert!((c.lag - 0.1).abs() < 0.021, "lag = {}", c.lag);
        assert!(c.lag_correlation >= c.correlation);
    }

    #[test]
    fn compare_rejects_mismatched_kinds() {
        let times = vec![0.0, 1.0];
        let a = vec![series("gradient", times.clone(), |t| t)];
        let b = vec![MetricSeries {
            name: "gradient".into(),
            times,
            values: SeriesValues::Vector {
                columns: vec!["g_0".into(), "g_1".into()],
                rows: vec![vec![0.0, 1.0], vec![1.0, 2.0]],
            },
        }];
        assert!(matches!(
            compare(&a, &b, "gradient", TimeAlignment::Normalized),
            Err(TraceError::IncompatibleMetricKinds { .. })
        ));
        assert!(matches!(
            compare(&a, &a, "R", TimeAlignment::Normalized),
            Err(TraceError::MissingMetric { .. })
        ));
    }
}
