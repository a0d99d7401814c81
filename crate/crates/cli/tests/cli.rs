use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oscsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscsim"))
        .args(args)
        .output()
        .expect("run oscsim")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL: &str = "oscillators = 6\nt_end = 5.0\noutput.heatmap_every = 10\n";

#[test]
fn simulate_writes_all_outputs_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let o = oscsim(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in [
        "R.csv",
        "entropy.csv",
        "gradient.csv",
        "pairwise.csv",
        "heatmap/index.csv",
        "heatmap/block_00000.csv",
        "potential.csv",
        "trajectory.csv",
        "manifest.toml",
    ] {
        assert!(a.join(f).exists(), "missing {f}");
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "oscillators = 5\nt_end = 4.0\nnoise.coefficient = 0.1\n");
    let a = tmp.path().join("a");
    let o = oscsim(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let b = tmp.path().join("b");
    let manifest = a.join("manifest.toml");
    let o = oscsim(&["simulate", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["R.csv", "trajectory.csv", "manifest.toml", "summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_one_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let bad = write(
        tmp.path(),
        "bad.toml",
        "potential.kind = \"piecewise-sin\"\npotential.sigma = 0.0\n",
    );
    let o = oscsim(&["simulate", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sigma"), "{}", stderr(&o));

    let unknown = write(tmp.path(), "unknown.toml", "kapa = 1.0\n");
    let o = oscsim(&["simulate", "--config", &unknown, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kapa"));

    let o = oscsim(&[
        "simulate",
        "--config",
        &write(tmp.path(), "ok.toml", SMALL),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "t_end=-1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("t_end"));
}

#[test]
fn missing_config_is_an_io_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    let o = oscsim(&["simulate", "--config", missing.to_str().unwrap(), "--out", "unused"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", SMALL);
    let blocker = write(tmp.path(), "file", "");
    let out = Path::new(&blocker).join("sub");
    let o = oscsim(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn step_underflow_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "stiff.toml",
        "oscillators = 2\nkappa = 1e4\npotential.s = 1e6\nt_end = 1.0\n\
         integrator.min_step = 1e-3\ninitial.value = 0.5\n",
    );
    let out = tmp.path().join("o");
    let o = oscsim(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_scenario_lists_valid_names() {
    let o = oscsim(&["scenario", "gssor", "--out", "unused"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    for name in ["gssor-uni", "gssor-bidir", "noise-sweep", "jacobi-desync"] {
        assert!(e.contains(name), "{e}");
    }
}

#[test]
fn noise_sweep_scenario_writes_one_directory_per_coefficient() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ns");
    let o = oscsim(&[
        "scenario",
        "noise-sweep",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "t_end=2.0",
        "--set",
        "output.metrics=R",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for k in [2, 3, 5, 6, 10, 15, 20] {
        let m = fs::read_to_string(out.join(format!("noise-{k}/manifest.toml"))).unwrap();
        assert!(m.contains(&format!("noise.coefficient = {:?}", k as f64 / 100.0)), "{m}");
    }
}

#[test]
fn scenario_override_replaces_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("j");
    let o = oscsim(&[
        "scenario",
        "jacobi-desync",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "t_end=3.0",
        "--set",
        "oscillators=6",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(m.contains("oscillators = 6\n") && m.contains("t_end = 3.0\n"));
    assert!(m.contains("potential.kind = \"piecewise-sin\""));
}

fn sweep(dir: &Path, cfg: &str, values: &str) -> Output {
    oscsim(&[
        "sweep",
        "--config",
        cfg,
        "--param",
        "noise.coefficient",
        "--values",
        values,
        "--seeds",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn sweep_counts_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "base.toml", "oscillators = 4\nt_end = 4.0\noutput.metrics = \"R\"\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = sweep(dir, &cfg, "0.02,0.2");
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let runs = fs::read_to_string(a.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 7);
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(summary, fs::read_to_string(b.join("summary.csv")).unwrap());
    assert_eq!(runs, fs::read_to_string(b.join("runs.csv")).unwrap());
}

#[test]
fn sweep_rejects_empty_values_and_unknown_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "base.toml", "oscillators = 4\nt_end = 1.0\n");
    let o = sweep(&tmp.path().join("o"), &cfg, "");
    assert_eq!(o.status.code(), Some(1));
    let o = oscsim(&[
        "sweep", "--config", &cfg, "--param", "noise.level", "--values", "1", "--out", "unused",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("noise.level"));
}

fn synthetic_trace(p: usize, iterations: u64, lag: bool) -> String {
    let mut s = String::from("rank,time,iteration\n");
    for k in 0..=iterations {
        for r in 0..p {
            let it = if lag { (p - r) as u64 + k } else { k };
            s.push_str(&format!("{r},{k}.0,{it}\n"));
        }
    }
    s
}

#[test]
fn lockstep_trace_gives_unit_order_parameter() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = write(tmp.path(), "lock.csv", &synthetic_trace(4, 5, false));
    let out = tmp.path().join("t");
    let o = oscsim(&["trace", "--trace", &trace, "--metrics", "R,entropy", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = fs::read_to_string(out.join("R.csv")).unwrap();
    let mut lines = r.lines();
    assert_eq!(lines.next(), Some("t,R"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn wavefront_trace_heatmap_has_diagonal_gradient() {
    let tmp = tempfile::tempdir().unwrap();
    let p = 4;
    let trace = write(tmp.path(), "wave.csv", &synthetic_trace(p, 3, true));
    let out = tmp.path().join("t");
    let o = oscsim(&[
        "trace",
        "--trace",
        &trace,
        "--metrics",
        "heatmap",
        "--set",
        "output.heatmap_every=1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let block = fs::read_to_string(out.join("heatmap/block_00001.csv")).unwrap();
    for (i, line) in block.lines().enumerate() {
        for (j, v) in line.split(',').enumerate() {
            assert_eq!(v.parse::<f64>().unwrap(), TAU * (i as f64 - j as f64));
        }
    }
}

#[test]
fn malformed_trace_reports_the_row() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = write(tmp.path(), "bad.csv", "rank,time,iteration\n0,0.0,0\n1,zero,0\n");
    let o = oscsim(&["trace", "--trace", &trace, "--out", tmp.path().join("t").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn trace_compares_against_a_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "oscillators = 4\nt_end = 5.0\noutput.metrics = \"R,entropy\"\n");
    let sim = tmp.path().join("sim");
    assert!(oscsim(&["simulate", "--config", &cfg, "--out", sim.to_str().unwrap()]).status.success());
    let trace = write(tmp.path(), "lock.csv", &synthetic_trace(4, 5, false));
    let out = tmp.path().join("t");
    let o = oscsim(&[
        "trace",
        "--trace",
        &trace,
        "--metrics",
        "R,entropy",
        "--sim",
        sim.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("compare_R.csv")).unwrap();
    assert!(csv.starts_with("t,sim,trace,delta\n"));
    let summary = fs::read_to_string(out.join("compare_R.txt")).unwrap();
    assert!(summary.contains("max_abs_delta = "));
    assert!(out.join("compare_entropy.csv").exists());
}
