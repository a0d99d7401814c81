//! Parameter sweeps: the Cartesian product of values and seeds, each point
//! an independent run.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::config::{key_type, ConfigError, FlatConfig, KeyType};
use crate::exec::Execution;
use crate::metrics::fmt_num;
use crate::model::{validate, SimulationConfig, ValidationReport};
use crate::run::{self, RunError, RunSummary};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least one value")]
    EmptyValues,
    #[error("sweep needs at least one seed per point")]
    NoSeeds,
    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),
    #[error("sweep parameter `{0}` is not numeric")]
    NotNumeric(String),
    #[error("sweep parameter `{key}` is an integer, got {value}")]
    NotInteger { key: String, value: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid configuration at {key} = {value}: {report}")]
    Invalid {
        key: String,
        value: f64,
        report: ValidationReport,
    },
    #[error(transparent)]
    Run(#[from] RunError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub parameter: String,
    pub values: Vec<f64>,
    pub seeds: usize,
    /// Run `k` of every point uses seed `base_seed + k` for all streams.
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub value: f64,
    pub seed: u64,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub runs: usize,
    pub reached: usize,
    /// Median over all runs with unreached runs ranked last; `None` when
    /// the median run did not resynchronize.
    pub median_resync: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub runs: Vec<SweepRun>,
    pub points: Vec<SweepPoint>,
}

/// Median with `None` sorted after every value.
pub fn median_resync(times: &[Option<f64>]) -> Option<f64> {
    let mut v: Vec<f64> = times.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let m = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    m.is_finite().then_some(m)
}

fn value_for(key: &str, x: f64) -> Result<toml::Value, SweepError> {
    match key_type(key) {
        None => Err(SweepError::UnknownParameter(key.to_string())),
        Some(KeyType::Float) => Ok(toml::Value::Float(x)),
        Some(KeyType::Int) => {
            if x.fract() == 0.0 && x.abs() < 2f64.powi(53) {
                Ok(toml::Value::Integer(x as i64))
            } else {
                Err(SweepError::NotInteger {
                    key: key.to_string(),
                    value: x,
                })
            }
        }
        Some(_) => Err(SweepError::NotNumeric(key.to_string())),
    }
}

/// Runs every `(value, seed)` pair of the plan; the result order is values
/// outer, seeds inner, independent of `exec`.
pub fn run_sweep(base: &FlatConfig, plan: &SweepPlan, exec: Execution) -> Result<SweepResult, SweepError> {
    if plan.values.is_empty() {
        return Err(SweepError::EmptyValues);
    }
    if plan.seeds == 0 {
        return Err(SweepError::NoSeeds);
    }
    let mut jobs = Vec::new();
    for &value in &plan.values {
        let v = value_for(&plan.parameter, value)?;
        for k in 0..plan.seeds {
            let seed = plan.base_seed.wrapping_add(k as u64);
            let mut flat = base.clone();
            flat.apply_seed(seed);
            flat.set(&plan.parameter, v.clone())?;
            let cfg = validate(flat.build()?).map_err(|report| SweepError::Invalid {
                key: plan.parameter.clone(),
                value,
                report,
            })?;
            jobs.push((value, seed, cfg));
        }
    }

    let results = exec.map(&jobs, |(value, seed, cfg)| {
        run::simulate(cfg, Execution::Sequential).map(|o| SweepRun {
            value: *value,
            seed: *seed,
            summary: o.summary,
        })
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let points = plan
        .values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let chunk = &runs[i * plan.seeds..(i + 1) * plan.seeds];
            let times: Vec<Option<f64>> = chunk.iter().map(|r| r.summary.resync.time()).collect();
            SweepPoint {
                value,
                runs: chunk.len(),
                reached: times.iter().flatten().count(),
                median_resync: median_resync(&times),
            }
        })
        .collect();

    Ok(SweepResult {
        plan: plan.clone(),
        runs,
        points,
    })
}

fn opt(t: Option<f64>) -> String {
    t.map_or_else(|| "NotReached".to_string(), fmt_num)
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), RunError> {
    let ctx = format!("writing {}", path.display());
    let mut f = io::BufWriter::new(fs::File::create(path).map_err(|source| RunError::Io {
        context: ctx.clone(),
        source,
    })?);
    body(&mut f)
        .and_then(|_| f.flush())
        .map_err(|source| RunError::Io { context: ctx, source })
}

impl SweepResult {
    /// Writes `runs.csv`, `summary.csv` and `manifest.toml`.
    pub fn write(&self, base: &SimulationConfig, dir: &Path) -> Result<(), RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            context: format!("creating {}", dir.display()),
            source,
        })?;
        let param = &self.plan.parameter;
        write_file(&dir.join("runs.csv"), |w| {
            writeln!(w, "{param},seed,resync_time,final_R,final_spread")?;
            for r in &self.runs {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_num(r.value),
                    r.seed,
                    opt(r.summary.resync.time()),
                    fmt_num(r.summary.final_r),
                    fmt_num(r.summary.final_spread)
                )?;
            }
            Ok(())
        })?;
        write_file(&dir.join("summary.csv"), |w| {
            writeln!(w, "{param},runs,reached,median_resync_time")?;
            for p in &self.points {
                writeln!(w, "{},{},{},{}", fmt_num(p.value), p.runs, p.reached, opt(p.median_resync))?;
            }
            Ok(())
        })?;
        let values: Vec<String> = self.plan.values.iter().map(|&v| format!("{v:?}")).collect();
        let text = format!(
            "{}tool.sweep.parameter = \"{}\"\ntool.sweep.values = [{}]\ntool.sweep.seeds = {}\ntool.sweep.base_seed = {}\n",
            run::manifest(base),
            param,
            values.join(", "),
            self.plan.seeds,
            self.plan.base_seed as i64
        );
        write_file(&dir.join("manifest.toml"), |w| w.write_all(text.as_bytes()))
    }
}
