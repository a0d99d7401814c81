//! Named presets for the four case studies.
//!
//! All presets use 18 oscillators, `t_comp = 0.9`, `t_comm = 0.1` and a
//! localized perturbation `θ_1 = 3π/2`. Durations and potential parameters
//! are preset choices: long enough for the qualitative behavior to settle,
//! short enough to run in seconds.

use std::f64::consts::PI;

use crate::config::FlatConfig;

pub const NAMES: [&str; 4] = ["gssor-uni", "gssor-bidir", "noise-sweep", "jacobi-desync"];

/// Noise coefficients of the sweep, in percent of the noise-free velocity.
pub const NOISE_PERCENTAGES: [u32; 7] = [2, 3, 5, 6, 10, 15, 20];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown scenario `{0}`; valid names: gssor-uni, gssor-bidir, noise-sweep, jacobi-desync")]
pub struct UnknownScenario(pub String);

fn common() -> String {
    format!(
        "oscillators = 18\nt_comp = 0.9\nt_comm = 0.1\nkappa = 1.0\n\
         initial.kind = \"perturbation\"\ninitial.count = 1\ninitial.value = {:?}\n\
         topology.kind = \"chain\"\ntopology.periodic = false\n",
        1.5 * PI
    )
}

/// The resync-capable scalable-code preset, unidirectional chain.
fn gssor_uni() -> String {
    common()
        + "beta = 1.0\ntopology.direction = \"unidirectional\"\n\
           potential.kind = \"tanh\"\npotential.s = 5.0\nt_end = 250.0\n"
}

fn gssor_bidir() -> String {
    common()
        + "beta = 2.0\ntopology.direction = \"bidirectional\"\n\
           potential.kind = \"tanh\"\npotential.s = 5.0\nt_end = 250.0\n"
}

/// Bottlenecked-code preset. The constant delay puts `ωτ` between `2σ/3`
/// and `σ`, which makes the uniform wavefront the attracting state.
fn jacobi_desync() -> String {
    common()
        + "beta = 1.0\ntopology.direction = \"unidirectional\"\n\
           potential.kind = \"piecewise-sin\"\npotential.sigma = 1.5\n\
           delay.kind = \"constant\"\ndelay.tau = 0.215\nt_end = 200.0\n"
}

/// Base config of the noise sweep; [`noise_sweep_points`] adds the
/// coefficient.
fn noise_sweep() -> String {
    gssor_uni() + "noise.base = \"deterministic\"\nnoise.refresh_interval = 0.001\n"
}

/// Flat config of a single-run preset (`noise-sweep` yields its base).
pub fn preset(name: &str) -> Result<FlatConfig, UnknownScenario> {
    let text = match name {
        "gssor-uni" => gssor_uni(),
        "gssor-bidir" => gssor_bidir(),
        "noise-sweep" => noise_sweep(),
        "jacobi-desync" => jacobi_desync(),
        other => return Err(UnknownScenario(other.to_string())),
    };
    Ok(FlatConfig::parse(&text).expect("presets are well-formed"))
}

/// `(subdirectory, coefficient)` for every point of the noise sweep.
pub fn noise_sweep_points() -> Vec<(String, f64)> {
    NOISE_PERCENTAGES
        .iter()
        .map(|&k| (format!("noise-{k}"), k as f64 / 100.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, DelaySpec, PotentialSpec};

    #[test]
    fn presets_validate_without_overrides() {
        for name in NAMES {
            let cfg = preset(name).unwrap().build().unwrap();
            assert_eq!(cfg.oscillators, 18);
            assert!(validate(cfg).is_ok(), "{name}");
        }
    }

    #[test]
    fn preset_contents() {
        let bidir = preset("gssor-bidir").unwrap().build().unwrap();
        assert_eq!(bidir.beta, 2.0);
        assert!(bidir.topology.is_symmetric());
        let jac = preset("jacobi-desync").unwrap().build().unwrap();
        assert_eq!(jac.potential, PotentialSpec::PiecewiseSin { sigma: 1.5 });
        assert!(matches!(jac.delay, DelaySpec::Constant { .. }));
        assert_eq!(noise_sweep_points().len(), 7);
        assert_eq!(noise_sweep_points()[0], ("noise-2".to_string(), 0.02));
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let e = preset("gssor").unwrap_err();
        for name in NAMES {
            assert!(e.to_string().contains(name));
        }
    }
}
