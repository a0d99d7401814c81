//! Interaction potentials `V(Δθ)` evaluated on raw phase differences.

use std::f64::consts::PI;

use crate::model::PotentialSpec;

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Coupling response for a phase difference `dtheta = θ_j − θ_i`.
///
/// No modular reduction is applied: the piecewise potential is deliberately
/// non-periodic outside its repulsive window.
pub fn eval(potential: &PotentialSpec, dtheta: f64) -> f64 {
    match *potential {
        PotentialSpec::Sin => dtheta.sin(),
        PotentialSpec::Tanh { s } => (s * dtheta).tanh(),
        PotentialSpec::PiecewiseSin { sigma } => {
            if dtheta.abs() < sigma {
                -(1.5 * PI / sigma * dtheta).sin()
            } else {
                sgn(dtheta)
            }
        }
        PotentialSpec::Fourier { a, b, order } => {
            let n = order as f64;
            dtheta.sin() - a * (n * dtheta).sin() + b * (2.0 * n * dtheta).sin()
        }
    }
}

/// True when `|V(x) + V(−x)| <= 1e-12` for every sample.
pub fn is_antisymmetric_witness(potential: &PotentialSpec, samples: &[f64]) -> bool {
    samples
        .iter()
        .all(|&x| (eval(potential, x) + eval(potential, -x)).abs() <= 1e-12)
}

/// Upper bound on `|V|` over all inputs.
pub fn bound(potential: &PotentialSpec) -> f64 {
    match *potential {
        PotentialSpec::Sin | PotentialSpec::Tanh { .. } | PotentialSpec::PiecewiseSin { .. } => 1.0,
        PotentialSpec::Fourier { a, b, .. } => 1.0 + a.abs() + b.abs(),
    }
}
