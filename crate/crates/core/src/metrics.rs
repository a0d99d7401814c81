//! Synchronization and desynchronization metrics over phase vectors, and
//! timestamped series of them.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::exec::Execution;
use crate::model::{PotentialSpec, TopologyMatrix};
use crate::potentials;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("dimension mismatch: topology has {expected} oscillators, phase vector has {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

fn check_dims(theta: &[f64], topology: &TopologyMatrix) -> Result<(), MetricError> {
    if topology.size() != theta.len() {
        return Err(MetricError::DimensionMismatch {
            expected: topology.size(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// Maps to `[0, 2π)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Maps to `[−π, π)`.
pub fn wrap_pi(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Unit-circle coordinates `(cos(θ_k − φ), sin(θ_k − φ))`; `phi` is the
/// rotating-frame angle (0 for the lab frame).
pub fn phase_circle(theta: &[f64], phi: f64) -> Vec<(f64, f64)> {
    theta
        .iter()
        .map(|&x| {
            let (s, c) = (x - phi).sin_cos();
            (c, s)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParameter {
    pub r: f64,
    /// Mean phase in `(−π, π]`; 0 when undefined.
    pub psi: f64,
    /// False when `R < 1e−12` and the mean phase carries no information.
    pub psi_defined: bool,
}

/// `R e^{iψ} = (1/P) Σ_j e^{iθ_j}`.
pub fn order_parameter(theta: &[f64]) -> OrderParameter {
    let n = theta.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &x in theta {
        let (s, c) = x.sin_cos();
        re += c;
        im += s;
    }
    re /= n;
    im /= n;
    let r = re.hypot(im).min(1.0);
    if r < 1e-12 {
        OrderParameter {
            r,
            psi: 0.0,
            psi_defined: false,
        }
    } else {
        OrderParameter {
            r,
            psi: im.atan2(re),
            psi_defined: true,
        }
    }
}

/// Linear-interpolation quantile of sorted data (the "type 7" definition).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Freedman–Diaconis bin count for wrapped phases, clamped to `[1, P]`.
pub fn fd_bins(theta: &[f64]) -> usize {
    let mut w: Vec<f64> = theta.iter().map(|&x| wrap_2pi(x)).collect();
    w.sort_by(f64::total_cmp);
    let n = w.len();
    if n < 2 {
        return 1;
    }
    let iqr = quantile(&w, 0.75) - quantile(&w, 0.25);
    if iqr <= 0.0 {
        return 1;
    }
    let h = 2.0 * iqr / (n as f64).cbrt();
    ((TAU / h).ceil() as usize).clamp(1, n)
}

const ENTROPY_EPS: f64 = 1e-12;

/// Entropy of wrapped phases over `n_bins` equal bins anchored at 0.
pub fn sync_entropy_binned(theta: &[f64], n_bins: usize) -> f64 {
    let n_bins = n_bins.max(1);
    let width = TAU / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in theta {
        let b = ((wrap_2pi(x) / width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let n = theta.len() as f64;
    let s: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * (p + ENTROPY_EPS).ln()
        })
        .sum();
    s.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub value: f64,
    pub bins: usize,
}

/// Shannon entropy (natural log) of the phase distribution, binned by the
/// Freedman–Diaconis rule.
pub fn sync_entropy(theta: &[f64]) -> Entropy {
    let bins = fd_bins(theta);
    Entropy {
        value: sync_entropy_binned(theta, bins),
        bins,
    }
}

/// `g_i = Σ_j T_ij · |θ_j − θ_i|` on raw phases.
pub fn phase_gradient(theta: &[f64], topology: &TopologyMatrix) -> Result<Vec<f64>, MetricError> {
    gradient_with(theta, topology, |d| d.abs())
}

/// Like [`phase_gradient`] with each difference wrapped to `[−π, π)` first.
pub fn phase_gradient_wrapped(
    theta: &[f64],
    topology: &TopologyMatrix,
) -> Result<Vec<f64>, MetricError> {
    gradient_with(theta, topology, |d| wrap_pi(d).abs())
}

fn gradient_with(
    theta: &[f64],
    topology: &TopologyMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<Vec<f64>, MetricError> {
    check_dims(theta, topology)?;
    Ok((0..theta.len())
        .map(|i| topology.in_neighbors(i).map(|j| f(theta[j] - theta[i])).sum())
        .collect())
}

/// `Δθ_ij = θ_j − θ_i` for `j < i`, ordered by `i` then `j`.
pub fn pairwise_differences(theta: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(theta.len() * theta.len().saturating_sub(1) / 2);
    for i in 1..theta.len() {
        for j in 0..i {
            out.push(theta[j] - theta[i]);
        }
    }
    out
}

/// Column labels matching [`pairwise_differences`].
pub fn pairwise_labels(p: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 1..p {
        for j in 0..i {
            out.push(format!("d_{i}_{j}"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width histogram over `[lo, hi]`; values outside are clamped into
/// the end bins.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Histogram {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let b = ((v - lo) / width).floor();
        let b = if b.is_nan() { 0 } else { (b.max(0.0) as usize).min(bins - 1) };
        counts[b] += 1;
    }
    Histogram { edges, counts }
}

/// Histogram of pairwise differences on a range symmetric about zero.
pub fn pairwise_histogram(theta: &[f64], bins: usize) -> Histogram {
    let diffs = pairwise_differences(theta);
    let m = diffs.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let m = if m > 0.0 { m } else { 1.0 };
    histogram(&diffs, bins, -m, m)
}

/// `M_ij = θ_j − θ_i`, optionally wrapped to `[−π, π)`. Row-major `P × P`.
pub fn difference_heatmap(theta: &[f64], wrap: bool) -> Vec<f64> {
    let p = theta.len();
    let mut m = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            let d = theta[j] - theta[i];
            m.push(if wrap { wrap_pi(d) } else { d });
        }
    }
    m
}

/// `Σ_i Σ_j T_ij · V(θ_j − θ_i)²`.
pub fn potential_energy(
    theta: &[f64],
    topology: &TopologyMatrix,
    potential: &PotentialSpec,
) -> Result<f64, MetricError> {
    check_dims(theta, topology)?;
    Ok((0..theta.len())
        .map(|i| {
            topology
                .in_neighbors(i)
                .map(|j| potentials::eval(potential, theta[j] - theta[i]).powi(2))
                .sum::<f64>()
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resync {
    Reached(f64),
    NotReached,
}

impl Resync {
    pub fn time(self) -> Option<f64> {
        match self {
            Resync::Reached(t) => Some(t),
            Resync::NotReached => None,
        }
    }
}

/// Earliest sample time `t*` such that `R ≥ threshold` on every sample in
/// `[t*, t* + window]`. The window must fit inside the series.
pub fn resync_time(times: &[f64], r: &[f64], threshold: f64, window: f64) -> Resync {
    assert_eq!(times.len(), r.len());
    let Some(&t_last) = times.last() else {
        return Resync::NotReached;
    };
    let tol = 1e-9 * window.max(1.0);
    let n = times.len();
    // next_bad[k]: first index ≥ k below the threshold
    let mut next_bad = vec![n; n + 1];
    for k in (0..n).rev() {
        next_bad[k] = if r[k] < threshold { k } else { next_bad[k + 1] };
    }
    for k in 0..n {
        let t = times[k];
        if t + window > t_last + tol {
            break;
        }
        let bad = next_bad[k];
        if bad == n || times[bad] > t + window + tol {
            return Resync::Reached(t);
        }
    }
    Resync::NotReached
}

/// Values of a metric over the samples of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValues {
    Scalar(Vec<f64>),
    /// One row per sample; `columns` holds the header labels.
    Vector {
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
    },
    /// One row-major `size × size` block per sample.
    Matrix { size: usize, blocks: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: SeriesValues,
}

impl MetricSeries {
    pub fn scalar(name: &str, times: Vec<f64>, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            times,
            values: SeriesValues::Scalar(values),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn kind(&self) -> &'static str {
        match self.values {
            SeriesValues::Scalar(_) => "scalar",
            SeriesValues::Vector { .. } => "vector",
            SeriesValues::Matrix { .. } => "matrix",
        }
    }

    pub fn as_scalar(&self) -> Option<&[f64]> {
        match &self.values {
            SeriesValues::Scalar(v) => Some(v),
            _ => None,
        }
    }

    /// Writes the CSV form. Scalar and vector series go to `path`; matrix
    /// series treat `path` as a directory holding `index.csv` and one block
    /// file per timestamp.
    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        match &self.values {
            SeriesValues::Scalar(v) => {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["t", self.name.as_str()])?;
                for (t, x) in self.times.iter().zip(v) {
                    w.write_record([fmt_num(*t), fmt_num(*x)])?;
                }
                w.flush()
            }
            SeriesValues::Vector { columns, rows } => {
                let mut w = csv::Writer::from_path(path)?;
                let mut header = vec!["t".to_string()];
                header.extend(columns.iter().cloned());
                w.write_record(&header)?;
                for (t, row) in self.times.iter().zip(rows) {
                    let rec = std::iter::once(fmt_num(*t)).chain(row.iter().map(|&x| fmt_num(x)));
                    w.write_record(rec)?;
                }
                w.flush()
            }
            SeriesValues::Matrix { size, blocks } => {
                fs::create_dir_all(path)?;
                let mut index = csv::Writer::from_path(path.join("index.csv"))?;
                index.write_record(["k", "t", "file"])?;
                for (k, (t, block)) in self.times.iter().zip(blocks).enumerate() {
                    let file = format!("block_{k:05}.csv");
                    index.write_record([k.to_string(), fmt_num(*t), file.clone()])?;
                    let mut out = io::BufWriter::new(fs::File::create(path.join(&file))?);
                    for row in block.chunks(*size) {
                        let line: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
                        writeln!(out, "{}", line.join(","))?;
                    }
                    out.flush()?;
                }
                index.flush()
            }
        }
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn bad_data(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

fn parse_row(rec: &csv::StringRecord, path: &Path) -> io::Result<Vec<f64>> {
    rec.iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| bad_data(format!("{}: not a number: {f:?}", path.display())))
        })
        .collect()
}

impl MetricSeries {
    /// Reads a series written by [`MetricSeries::write_csv`]. A directory is a
    /// matrix series; a file whose only value column is named `name` is scalar.
    pub fn read_csv(path: &Path, name: &str) -> io::Result<Self> {
        if path.is_dir() {
            let mut index = csv::Reader::from_path(path.join("index.csv"))?;
            let (mut times, mut blocks, mut size) = (Vec::new(), Vec::new(), 0);
            for rec in index.records() {
                let rec = rec?;
                let t = rec.get(1).and_then(|x| x.parse().ok()).ok_or_else(|| {
                    bad_data(format!("{}: malformed index row", path.display()))
                })?;
                let file = path.join(rec.get(2).unwrap_or_default());
                let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(&file)?;
                let mut block = Vec::new();
                let mut rows = 0;
                for row in r.records() {
                    block.extend(parse_row(&row?, &file)?);
                    rows += 1;
                }
                if block.len() != rows * rows {
                    return Err(bad_data(format!("{}: block is not square", file.display())));
                }
                size = rows;
                times.push(t);
                blocks.push(block);
            }
            return Ok(MetricSeries {
                name: name.to_string(),
                times,
                values: SeriesValues::Matrix { size, blocks },
            });
        }
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("t") || header.len() < 2 {
            return Err(bad_data(format!("{}: expected a `t,...` header", path.display())));
        }
        let (mut times, mut rows) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let mut row = parse_row(&rec?, path)?;
            times.push(row.remove(0));
            rows.push(row);
        }
        let values = if header.len() == 2 && header[1] == name {
            SeriesValues::Scalar(rows.into_iter().map(|r| r[0]).collect())
        } else {
            SeriesValues::Vector {
                columns: header[1..].to_vec(),
                rows,
            }
        };
        Ok(MetricSeries {
            name: name.to_string(),
            times,
            values,
        })
    }
}

/// Applies `f` to every sample and collects a scalar series.
pub fn scalar_series(
    name: &str,
    times: &[f64],
    states: &[Vec<f64>],
    exec: Execution,
    f: impl Fn(f64, &[f64]) -> f64 + Sync + Send,
) -> MetricSeries {
    let idx: Vec<usize> = (0..times.len()).collect();
    let values = exec.map(&idx, |&k| f(times[k], &states[k]));
    MetricSeries::scalar(name, times.to_vec(), values)
}

/// Applies `f` to every sample and collects a vector series.
pub fn vector_series(
    name: &str,
    columns: Vec<String>,
    times: &[f64],
    states: &[Vec<f64>],
    exec: Execution,
    f: impl Fn(f64, &[f64]) -> Vec<f64> + Sync + Send,
) -> MetricSeries {
    let idx: Vec<usize> = (0..times.len()).collect();
    let rows = exec.map(&idx, |&k| f(times[k], &states[k]));
    MetricSeries {
        name: name.to_string(),
        times: times.to_vec(),
        values: SeriesValues::Vector { columns, rows },
    }
}

/// Heatmap blocks for every `every`-th sample (the last sample is always
/// included).
pub fn heatmap_series(
    times: &[f64],
    states: &[Vec<f64>],
    every: usize,
    wrap: bool,
    exec: Execution,
) -> MetricSeries {
    let n = times.len();
    let mut picks: Vec<usize> = (0..n).step_by(every.max(1)).collect();
    if n > 0 && picks.last() != Some(&(n - 1)) {
        picks.push(n - 1);
    }
    let blocks = exec.map(&picks, |&k| difference_heatmap(&states[k], wrap));
    MetricSeries {
        name: "heatmap".into(),
        times: picks.iter().map(|&k| times[k]).collect(),
        values: SeriesValues::Matrix {
            size: states.first().map_or(0, Vec::len),
            blocks,
        },
    }
}
